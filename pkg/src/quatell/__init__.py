"""Quaternionic elliptic functions: Fueter-regular kernels, Eisenstein series,
Weierstrass functions of lattices in H, and their period relations."""

from .algebra import MultiIndex, Quat, QuatellError, sigma
from .elliptic import e_star, quasi_periods, wp, wp_series, zeta
from .kernels import BACKEND
from .lattice import Lattice, eisenstein, hurwitz, lipschitz, load_lattice_spec
from .regular import eval_G, eval_P, kernel

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Lattice",
    "MultiIndex",
    "Quat",
    "QuatellError",
    "e_star",
    "eisenstein",
    "eval_G",
    "eval_P",
    "hurwitz",
    "kernel",
    "lipschitz",
    "load_lattice_spec",
    "quasi_periods",
    "sigma",
    "wp",
    "wp_series",
    "zeta",
]
