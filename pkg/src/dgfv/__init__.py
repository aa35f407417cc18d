"""Hybrid DG/subcell-FV spectral element solver for the compressible Euler equations."""

from .basis import (
    GAUSS,
    GAUSS_LOBATTO,
    Operators1D,
    QuadratureRule,
    build_operators,
    complementary_grid,
    gauss_rule,
    lagrange_eval,
    lobatto_rule,
    make_operators,
)
from .euler import GasModel

__version__ = "0.1.0"

__all__ = [
    "GAUSS",
    "GAUSS_LOBATTO",
    "GasModel",
    "Operators1D",
    "QuadratureRule",
    "build_operators",
    "complementary_grid",
    "gauss_rule",
    "lagrange_eval",
    "lobatto_rule",
    "make_operators",
    "__version__",
]
