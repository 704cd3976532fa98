"""Hybridized summation-by-parts discretization of variable-coefficient elliptic problems.

The package builds 1D SBP operators, tensor-product 2D operators on curvilinear
blocks, per-block SAT systems with face trace unknowns, and the global
hybridized system, and solves it with sparse direct factorizations.
"""

from .global_assembly import GlobalSystem, ProblemData, assemble_global, discretize, flux_recovery
from .mesh import Mesh, MeshError, builtin_mesh, load_mesh, parse_mesh
from .sbp1d import build_first_derivative, build_second_derivative, borrowing_constants
from .sbp2d import Coefficients2D, build_face_operators, build_stiffness
from .solve import FactorizationError, Solution, solve_system

__version__ = "0.1.0"

__all__ = [
    "GlobalSystem",
    "ProblemData",
    "assemble_global",
    "discretize",
    "flux_recovery",
    "Mesh",
    "MeshError",
    "builtin_mesh",
    "load_mesh",
    "parse_mesh",
    "build_first_derivative",
    "build_second_derivative",
    "borrowing_constants",
    "Coefficients2D",
    "build_face_operators",
    "build_stiffness",
    "FactorizationError",
    "Solution",
    "solve_system",
    "__version__",
]
