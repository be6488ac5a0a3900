"""Spectral analysis of free-surface shear flows via the Rayleigh equation."""

from .kernel import BACKEND
from .profile import ShearProfile, parse_profile
from .rayleigh import SolverOptions, solve, solve_limit, solve_regular

__version__ = "0.1.0"

__all__ = ["BACKEND", "ShearProfile", "SolverOptions", "parse_profile", "solve",
           "solve_limit", "solve_regular", "__version__"]
