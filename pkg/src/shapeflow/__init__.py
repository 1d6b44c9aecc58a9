"""Shape optimization by inertial gradient flows on moving finite element meshes.

The package is organized bottom-up:

- ``mesh``: simplicial mesh containers, quality metrics, mesh motion, file IO.
- ``fixtures``: programmatic generators for the benchmark geometries.
- ``linalg``: sparse solver front ends (SPD, saddle point, generalized eigen).
- ``fem``: P1 / MINI element spaces, bilinear forms, curve and surface forms.
- ``models``: PDE-constrained shape functionals and their boundary gradients.
- ``mdr``: minimal deformation rate mesh motion (normal data, tangentially free).
- ``bgn``: curve-shortening regularization of boundary updates.
- ``inertial_flow``: the damped second-order flow driver for planar domains.
- ``willmore``: inertial Willmore flow for filling holes in open surfaces.
- ``cli``: the ``shapeflow`` command line front end and run artifacts.
"""

from shapeflow.mesh import (
    InversionError,
    MeshError,
    MeshQualityReport,
    SimplicialMesh2D,
    SurfaceMesh3D,
)

__all__ = [
    "InversionError",
    "MeshError",
    "MeshQualityReport",
    "SimplicialMesh2D",
    "SurfaceMesh3D",
]

__version__ = "0.1.0"
