"""Quadrature helpers used by the kernel solvers and frequency integrals.

Two workhorses live here: Gregory end-corrected trapezoidal weights for
integrals of tabulated functions (fourth-order accurate, still a trapezoid
rule away from the ends), and a panelized Gauss-Legendre rule for oscillatory
frequency integrals where the panel width is capped so the fastest phase is
always resolved.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

# Gregory end corrections of order 4: the first three weights replace the
# trapezoid's 1/2 edge weight; the interior stays at 1.
_GREGORY_EDGE = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0])


def gregory_weights(n: int, step: float) -> np.ndarray:
    """Weights for integrating a table of ``n`` equally spaced samples.

    Parameters
    ----------
    n : int
        Number of samples (the integral runs over ``(n - 1) * step``).
    step : float
        Grid spacing.

    Returns
    -------
    numpy.ndarray
        Weight vector ``w`` with ``integral ~= w @ samples``. For ``n >= 7``
        the rule is fourth order; shorter tables fall back to the plain
        trapezoid, which is exact enough for the vanishing-at-origin
        integrands it is used on.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if n == 1:
        return np.zeros(1)
    w = np.ones(n)
    if n >= 7:
        w[:3] = _GREGORY_EDGE
        w[-3:] = _GREGORY_EDGE[::-1]
    else:
        w[0] = 0.5
        w[-1] = 0.5
    return w * step


def integrate_table(samples: np.ndarray, step: float) -> float:
    """Integrate equally spaced samples with Gregory-corrected weights."""
    samples = np.asarray(samples, dtype=float)
    return float(gregory_weights(samples.size, step) @ samples)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

# Cap on simultaneously materialized quadrature nodes; finer levels are
# evaluated in blocks of this size so refinement never exhausts memory.
_NODE_BUDGET = 1 << 20


def panel_quadrature(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    max_panel_width: float,
    abs_tol: float = 1e-10,
) -> float:
    """Integrate ``f`` over ``[a, b]`` with 16-point Gauss-Legendre panels.

    The panel width is capped at ``max_panel_width`` so oscillatory
    integrands stay resolved; the result is refined by panel doubling until
    two successive levels agree within ``abs_tol``, a relative floor for
    large values, or the accumulation-noise floor of the level itself,
    whichever is loosest.

    Parameters
    ----------
    f : callable
        Vectorized integrand.
    a, b : float
        Integration limits, ``a < b``.
    max_panel_width : float
        Upper bound on a single panel's width. Pass ``numpy.inf`` for smooth
        integrands.
    abs_tol : float
        Convergence target between refinement levels.
    """
    if b <= a:
        return 0.0
    span = b - a
    n_panels = max(1, int(np.ceil(span / max_panel_width))) if np.isfinite(max_panel_width) else 1

    def _level(n: int) -> tuple[float, float]:
        edges = np.linspace(a, b, n + 1)
        block = max(1, _NODE_BUDGET // _GL_NODES.size)
        total = 0.0
        rough = 0.0
        for start in range(0, n, block):
            stop = min(n, start + block)
            mid = 0.5 * (edges[start + 1 : stop + 1] + edges[start:stop])
            half = 0.5 * (edges[start + 1 : stop + 1] - edges[start:stop])
            x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
            vals = f(x.ravel()).reshape(stop - start, _GL_NODES.size)
            total += float(np.sum(vals @ _GL_WEIGHTS * half))
            rough += float(np.sum(np.abs(vals) @ _GL_WEIGHTS * half))
        return total, rough

    prev, _ = _level(n_panels)
    for _ in range(8):
        n_panels *= 2
        cur, rough = _level(n_panels)
        noise = 64.0 * np.finfo(float).eps * rough
        if abs(cur - prev) <= max(abs_tol, 1e-12 * abs(cur), noise):
            return cur
        prev = cur
    from .errors import NumericalFailureError

    raise NumericalFailureError(
        f"panel quadrature did not converge to {abs_tol:g} (last delta "
        f"{abs(cur - prev):.3e})"
    )
