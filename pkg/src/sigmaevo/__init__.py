"""Numerical experiments for a critically damped sigma-evolution equation with
modified and classical Hartree-type nonlinearities."""
from .kernels import BACKEND
from .params import (
    ParameterError,
    Params,
    RegionReport,
    admissible_range,
    dimension_cap,
    hartree_threshold,
    p_crit,
    validate_params,
)
from .spectral import Grid, SpectralField

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Grid",
    "ParameterError",
    "Params",
    "RegionReport",
    "SpectralField",
    "admissible_range",
    "dimension_cap",
    "hartree_threshold",
    "p_crit",
    "validate_params",
]
