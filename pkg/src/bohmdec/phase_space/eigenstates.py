"""Exact oscillator eigenfunctions via scale-tracked Hermite recurrences.

The normalized three-term recurrence is carried with a per-point exponent
offset so that arbitrarily high levels can be evaluated without overflow or
premature underflow: values are represented as ``mantissa * exp(offset)`` and
the Gaussian factor is folded in only at the end.
"""

from __future__ import annotations

import numpy as np

from .system import OscillatorSystemSpec

__all__ = ["eigenfunction_exact", "eigenfunction_table"]

_RESCALE_THRESHOLD = 1e250
_RESCALE_LOG = np.log(_RESCALE_THRESHOLD)


def _hermite_mantissas(n: int, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run the normalized recurrence up to level ``n``.

    Returns mantissa arrays for levels ``n-1`` and ``n`` plus the shared
    per-point log-scale accumulated by overflow rescaling. The represented
    quantity is ``w_k(xi) = pi**(-1/4) * H_k(xi) / sqrt(2^k k!)`` so that the
    dimensionless eigenfunction is ``w_k * exp(-xi^2 / 2)``.
    """
    prev = np.zeros_like(xi)
    cur = np.full_like(xi, np.pi**-0.25)
    log_scale = np.zeros_like(xi)
    for k in range(n):
        nxt = np.sqrt(2.0 / (k + 1)) * xi * cur - np.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_THRESHOLD
        if np.any(big):
            prev[big] /= _RESCALE_THRESHOLD
            cur[big] /= _RESCALE_THRESHOLD
            log_scale[big] += _RESCALE_LOG
    return prev, cur, log_scale


def eigenfunction_exact(
    n: int, x: np.ndarray, system: OscillatorSystemSpec
) -> np.ndarray:
    """Evaluate the normalized level-``n`` eigenfunction at ``x``.

    Parameters
    ----------
    n : int
        Level index, ``n >= 0``. Arbitrarily high levels are handled by the
        scale-tracked recurrence.
    x : array_like
        Evaluation points.
    system : OscillatorSystemSpec

    Returns
    -------
    numpy.ndarray
        Real values of the standard (positive leading coefficient) Hermite
        eigenfunction, unit-normalized in ``x``.
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alpha = np.sqrt(system.mass * system.renormalized_frequency / system.hbar)
    xi = alpha * x
    _, cur, log_scale = _hermite_mantissas(n, xi)
    with np.errstate(under="ignore"):
        vals = cur * np.exp(log_scale - 0.5 * xi**2)
    return np.sqrt(alpha) * vals


def eigenfunction_table(
    levels: np.ndarray, x: np.ndarray, system: OscillatorSystemSpec
) -> np.ndarray:
    """Evaluate several eigenfunction levels on a shared point set.

    Parameters
    ----------
    levels : array_like of int
        Level indices; the recurrence runs once up to ``max(levels)``.
    x : array_like
        Evaluation points.
    system : OscillatorSystemSpec

    Returns
    -------
    numpy.ndarray
        Array of shape ``(len(levels), len(x))``.
    """
    levels = np.asarray(levels, dtype=int)
    if levels.size and levels.min() < 0:
        raise ValueError("level indices must be non-negative")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    alpha = np.sqrt(system.mass * system.renormalized_frequency / system.hbar)
    xi = alpha * x
    wanted = set(int(k) for k in levels)
    top = max(wanted) if wanted else 0

    rows: dict[int, np.ndarray] = {}
    prev = np.zeros_like(xi)
    cur = np.full_like(xi, np.pi**-0.25)
    log_scale = np.zeros_like(xi)

    def _store(k: int, mantissa: np.ndarray) -> None:
        with np.errstate(under="ignore"):
            rows[k] = np.sqrt(alpha) * mantissa * np.exp(log_scale - 0.5 * xi**2)

    if 0 in wanted:
        _store(0, cur)
    for k in range(top):
        nxt = np.sqrt(2.0 / (k + 1)) * xi * cur - np.sqrt(k / (k + 1)) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > _RESCALE_THRESHOLD
        if np.any(big):
            prev[big] /= _RESCALE_THRESHOLD
            cur[big] /= _RESCALE_THRESHOLD
            log_scale[big] += _RESCALE_LOG
        if (k + 1) in wanted:
            _store(k + 1, cur)
    return np.stack([rows[int(k)] for k in levels], axis=0)
