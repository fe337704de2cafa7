"""Explicit oscillator environments: exact propagation and conditioning.

Everything here treats the environment as a finite set of harmonic modes
coupled bilinearly to the central oscillator. The memory-kernel solver and
the block matrices propagate the full Gaussian exactly; the reduced smearing
matrix, the reversibility residuals, and the slice-conditioned kernel and
velocity build on those blocks. Spectral descriptions, mode discretization,
and thermal coherent-state sampling round out the toolkit.
"""

from .classicality import (
    ClassicalityReport,
    classicality_report,
    conditional_smearing_time,
)
from .conditional import (
    ConditionalKernel,
    cl_m_tilde_asymptote,
    cl_sigma3_squared_asymptote,
    conditional_kernel,
    conditional_velocity,
    m_tilde_matrix,
    sigma3_squared,
)
from .matrices import (
    BathPropagators,
    exact_bath_matrices,
    reduced_M_from_bath,
    reversibility_residuals,
    weak_coupling_matrices,
)
from .sampling import CoherentBathSample, sample_bath
from .spectral import (
    BathSpec,
    SpectralDensity,
    counterterm_bare_frequency,
    discretize_spectral_density,
)
from .volterra import GKernelTable, solve_g_kernel

__all__ = [
    "BathPropagators",
    "BathSpec",
    "ClassicalityReport",
    "CoherentBathSample",
    "ConditionalKernel",
    "GKernelTable",
    "SpectralDensity",
    "cl_m_tilde_asymptote",
    "cl_sigma3_squared_asymptote",
    "classicality_report",
    "conditional_kernel",
    "conditional_smearing_time",
    "conditional_velocity",
    "counterterm_bare_frequency",
    "discretize_spectral_density",
    "exact_bath_matrices",
    "m_tilde_matrix",
    "reduced_M_from_bath",
    "reversibility_residuals",
    "sample_bath",
    "sigma3_squared",
    "solve_g_kernel",
    "weak_coupling_matrices",
]
