"""Short-time position dephasing and the field nonnegativity threshold."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from ..errors import DomainValidityError, NumericalFailureError
from ..phase_space import OscillatorSystemSpec
from .coefficients import CaldeiraLeggettParams, MasterEqCoefficients
from .propagator import integrate_propagator

__all__ = ["position_decoherence_factor", "nonnegativity_threshold"]

_SHORT_TIME_LIMIT = 0.1


def position_decoherence_factor(
    cl_params: CaldeiraLeggettParams,
    system: OscillatorSystemSpec,
    t: float,
    x: np.ndarray,
    x_prime: np.ndarray,
) -> np.ndarray:
    """Short-time suppression of position coherences.

    ``exp(-Lambda t (x - x')^2)`` with ``Lambda = D / hbar^2``; valid only
    while both the oscillation and the damping are slow compared to the
    elapsed time.

    Parameters
    ----------
    cl_params : CaldeiraLeggettParams
    system : OscillatorSystemSpec
    t : float
        Elapsed time; requires ``omega t < 0.1`` and ``gamma t < 0.1``.
    x, x_prime : array_like
        Coordinate pairs of the coherence.

    Raises
    ------
    DomainValidityError
        Outside the short-time window.
    """
    w = system.renormalized_frequency
    if w * t >= _SHORT_TIME_LIMIT or cl_params.damping_rate * t >= _SHORT_TIME_LIMIT:
        raise DomainValidityError(
            "position_decoherence_factor is a short-time form; needs "
            f"omega*t < {_SHORT_TIME_LIMIT} and gamma*t < {_SHORT_TIME_LIMIT} "
            f"(got {w * t:g} and {cl_params.damping_rate * t:g})"
        )
    lam = cl_params.localization_rate(system)
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    return np.exp(-lam * t * (x - x_prime) ** 2)


def nonnegativity_threshold(
    coeffs: MasterEqCoefficients,
    system: OscillatorSystemSpec,
) -> float | None:
    """Earliest time at which the smearing determinant reaches ``hbar^2``.

    Past this time the propagated field of any initial state is bounded
    below by (numerically) zero. The determinant of the smearing matrix is
    monotone, so the crossing is found by bracketing and bisection.

    Parameters
    ----------
    coeffs : MasterEqCoefficients
    system : OscillatorSystemSpec

    Returns
    -------
    float or None
        The crossing time, or ``None`` when the equation has no diffusion
        (the determinant never grows).
    """
    if coeffs.diffusion_is_zero():
        return None
    target = system.hbar**2

    def det_gap(t: float) -> float:
        prop = integrate_propagator(coeffs, t)
        return float(np.linalg.det(prop.m)) - target

    k_scale = float(np.abs(coeffs.drift_matrix(0.0)).max())
    t = 1e-6 / max(k_scale, 1e-12)
    hi = None
    for _ in range(80):
        if det_gap(t) > 0.0:
            hi = t
            break
        t *= 2.0
    if hi is None:
        raise NumericalFailureError(
            "smearing determinant never reached hbar^2 within the scan range"
        )
    lo = hi / 2.0
    return float(brentq(det_gap, lo, hi, rtol=1e-12))
