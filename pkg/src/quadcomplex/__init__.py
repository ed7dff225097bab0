"""Lowest-degree finite element de Rham complex on convex quadrilateral grids.

The complex is QBL (vertex values) -> QRT (edge tangential averages) ->
piecewise constants. Main entry points:

- :mod:`quadcomplex.mesh` for meshes and bisection refinement,
- :mod:`quadcomplex.elements` for the local bases,
- :mod:`quadcomplex.assembly` for the model problems and solvers,
- :mod:`quadcomplex.derham` for the matrix form of the complex,
- :mod:`quadcomplex.experiments` and :mod:`quadcomplex.cli` for benchmarks.
"""

from .errors import (Degenerate, DegreeTooHigh, EmptyInterior, GeometryError,
                     NoConvergence, NonConvex, QuadComplexError, TooLargeForDense)
from .geometry import QuadFrame, frame_from_vertices
from .interpolation import FeFunction, interp_const, interp_qbl, interp_qrt
from .mesh import (QuadMesh, TriMesh, bisection_refine, four_trapezoid_square,
                   initial_quad_domain, uniform_square_mesh)

__version__ = "0.1.0"

__all__ = [
    "Degenerate", "DegreeTooHigh", "EmptyInterior", "FeFunction", "GeometryError",
    "NoConvergence", "NonConvex", "QuadComplexError", "QuadFrame", "QuadMesh",
    "TooLargeForDense", "TriMesh", "bisection_refine", "four_trapezoid_square",
    "frame_from_vertices", "initial_quad_domain", "interp_const", "interp_qbl",
    "interp_qrt", "uniform_square_mesh",
]
