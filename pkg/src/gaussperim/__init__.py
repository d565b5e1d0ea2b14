"""Nonlocal Gaussian perimeter: energies, s -> 1 sweeps, variations and halfspace stationarity."""

__version__ = "0.1.0"

from .geometry import (Ball, Box, Complement, DomainBall, DomainBox, FullSpace, Halfspace,  # noqa: E402
                       Polytope, complement, unit_cube)
from .kernels import Additive, Cutoff, FracParams  # noqa: E402
from .quad.integrate import IntegralResult, QuadSpec  # noqa: E402

__all__ = [
    "Additive", "Ball", "Box", "Complement", "Cutoff", "DomainBall", "DomainBox", "FracParams",
    "FullSpace", "Halfspace", "IntegralResult", "Polytope", "QuadSpec", "complement", "unit_cube",
]
