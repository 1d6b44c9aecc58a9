"""Stokes drag minimization around an obstacle in a channel.

First a sanity anchor: on the empty channel the dissipation objective
reproduces the analytic Poiseuille value.  Then the shape flow shrinks
the dissipation of the flow around a circular obstacle at fixed obstacle
volume, keeping the mesh valid throughout.
"""

from shapeflow import cli, fixtures, models


def main():
    drag = models.drag_case1()
    channel = fixtures.open_channel()
    J = drag.objective(channel, drag.solve(channel))
    target = 2.0 * drag.viscosity / 3.0
    print(f"poiseuille dissipation {J:.5f} vs analytic {target:.5f} "
          f"({abs(J - target) / target:.2%} off)")

    cfg = cli.load_config(None, dict(
        model="drag", flow="inertial-bgn-mdr", tau="0.005", T="0.2",
        viscosity="1", out="out/demo06/drag",
    ))
    out_dir = cli.run(cfg)
    _, rows = cli.read_history(out_dir / "history.csv")
    print(f"{'time':>6s} {'J':>10s} {'min angle':>10s}")
    for k in range(0, len(rows), 8):
        print(f"{rows[k][1]:6.3f} {rows[k][2]:10.5f} {rows[k][6]:10.2f}")
    print(f"drag objective {rows[0][2]:.4f} -> {rows[-1][2]:.4f} "
          f"in {len(rows) - 1} steps, no element inverted")


if __name__ == "__main__":
    main()
