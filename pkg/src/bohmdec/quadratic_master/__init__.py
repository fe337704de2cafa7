"""Quadratic master equations: coefficients, propagators, field evolution."""

from .apply import propagate_wigner
from .coefficients import (
    CaldeiraLeggettParams,
    MasterEqCoefficients,
    assemble_cl_coefficients,
)
from .decoherence import nonnegativity_threshold, position_decoherence_factor
from .pde_oracle import pde_oracle_evolve
from .propagator import GaussianPropagator, compose, integrate_propagator

__all__ = [
    "CaldeiraLeggettParams",
    "GaussianPropagator",
    "MasterEqCoefficients",
    "assemble_cl_coefficients",
    "compose",
    "integrate_propagator",
    "nonnegativity_threshold",
    "pde_oracle_evolve",
    "position_decoherence_factor",
    "propagate_wigner",
]
