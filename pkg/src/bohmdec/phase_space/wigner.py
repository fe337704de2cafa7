"""Phase-space grids, Wigner fields, and the wavefunction-to-Wigner map."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage

from ..errors import GridCoverageError
from .system import ClassicalOrbit, OscillatorSystemSpec

__all__ = [
    "GridSpec",
    "WignerField",
    "wigner_transform",
    "exact_oscillator_wigner",
    "density_matrix_from_wigner",
]


def _trapezoid(values: np.ndarray, step: float, axis: int = -1) -> np.ndarray:
    """Trapezoid rule along one axis of an equally spaced table."""
    values = np.asarray(values)
    total = values.sum(axis=axis)
    edges = np.take(values, [0, -1], axis=axis).sum(axis=axis)
    return (total - 0.5 * edges) * step


def _symmetric_axis(extent: float, max_step: float) -> np.ndarray:
    """Symmetric grid containing zero with spacing at most ``max_step``."""
    n_half = max(1, int(np.ceil(extent / max_step)))
    step = extent / n_half
    return step * np.arange(-n_half, n_half + 1)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular phase-space grid with uniform, symmetric axes."""

    x: np.ndarray
    p: np.ndarray

    def __post_init__(self) -> None:
        for name in ("x", "p"):
            axis = np.asarray(getattr(self, name), dtype=float)
            if axis.ndim != 1 or axis.size < 2:
                raise ValueError(f"GridSpec.{name} must be a 1-D grid")
            steps = np.diff(axis)
            if not np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
                raise ValueError(f"GridSpec.{name} must be uniformly spaced")
            object.__setattr__(self, name, axis)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    @classmethod
    def for_orbit(
        cls,
        orbit: ClassicalOrbit,
        x_span: float = 1.5,
        p_span: float = 3.0,
        x_step: float | None = None,
        p_step: float | None = None,
    ) -> "GridSpec":
        """Default grid for a band state's orbit.

        Position covers ``x_span * x_max`` each side with spacing at most a
        quarter de Broglie length; momentum covers ``p_span * m omega x_max``
        with spacing at most ``hbar / (4 x_max)``.
        """
        sys_ = orbit.system
        p_scale = sys_.mass * sys_.renormalized_frequency * orbit.amplitude
        if x_step is None:
            x_step = orbit.de_broglie / 4.0
        if p_step is None:
            p_step = sys_.hbar / (4.0 * orbit.amplitude)
        return cls(
            x=_symmetric_axis(x_span * orbit.amplitude, x_step),
            p=_symmetric_axis(p_span * p_scale, p_step),
        )


@dataclass
class WignerField:
    """Wigner function samples on a :class:`GridSpec`-style grid.

    Attributes
    ----------
    x_grid, p_grid : numpy.ndarray
        Uniform axes.
    values : numpy.ndarray
        Real samples, shape ``(len(x_grid), len(p_grid))``.
    time_stamp : float
        Evolution time the samples correspond to.
    notes : tuple of str
        Diagnostic flags accumulated by producers (fallback paths,
        normalization residues).
    """

    x_grid: np.ndarray
    p_grid: np.ndarray
    values: np.ndarray
    time_stamp: float = 0.0
    notes: tuple = ()

    def __post_init__(self) -> None:
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.p_grid = np.asarray(self.p_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.x_grid.size, self.p_grid.size):
            raise ValueError(
                "WignerField.values must have shape (len(x_grid), len(p_grid))"
            )

    @property
    def dx(self) -> float:
        return float(self.x_grid[1] - self.x_grid[0])

    @property
    def dp(self) -> float:
        return float(self.p_grid[1] - self.p_grid[0])

    def normalization(self) -> float:
        """Phase-space integral of the field."""
        return float(_trapezoid(_trapezoid(self.values, self.dp, axis=1), self.dx))

    def marginal_position(self) -> np.ndarray:
        """Momentum-integrated density on ``x_grid``."""
        return _trapezoid(self.values, self.dp, axis=1)

    def marginal_momentum(self) -> np.ndarray:
        """Position-integrated density on ``p_grid``."""
        return _trapezoid(self.values, self.dx, axis=0)

    def mean_and_covariance(self) -> tuple[np.ndarray, np.ndarray]:
        """First and second central moments ``(mean, covariance)``."""
        norm = self.normalization()
        mx = self.marginal_position()
        mp = self.marginal_momentum()
        mean_x = float(_trapezoid(self.x_grid * mx, self.dx)) / norm
        mean_p = float(_trapezoid(self.p_grid * mp, self.dp)) / norm
        dxv = self.x_grid - mean_x
        dpv = self.p_grid - mean_p
        cxx = float(_trapezoid(dxv**2 * mx, self.dx)) / norm
        cpp = float(_trapezoid(dpv**2 * mp, self.dp)) / norm
        inner = _trapezoid(self.values * dpv[None, :], self.dp, axis=1)
        cxp = float(_trapezoid(dxv * inner, self.dx)) / norm
        return np.array([mean_x, mean_p]), np.array([[cxx, cxp], [cxp, cpp]])

    def value_at(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        """Bicubic interpolation of the field at arbitrary points."""
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        rows = (x - self.x_grid[0]) / self.dx
        cols = (p - self.p_grid[0]) / self.dp
        return ndimage.map_coordinates(
            self.values,
            np.broadcast_arrays(rows, cols),
            order=3,
            mode="constant",
            cval=0.0,
        )


def _support_interval(
    sampler: Callable[[np.ndarray], np.ndarray],
    probe_lo: float,
    probe_hi: float,
    probe_step: float,
    cutoff: float,
) -> tuple[float, float, float]:
    """Locate where ``|psi|`` exceeds ``cutoff`` times its peak.

    The probe window is widened until the envelope is below threshold at both
    ends. Returns ``(lo, hi, peak)``.
    """
    lo, hi = probe_lo, probe_hi
    for _ in range(12):
        grid = np.arange(lo, hi + probe_step, probe_step)
        env = np.abs(sampler(grid))
        peak = float(env.max())
        mask = env > cutoff * peak
        if mask[0] or mask[-1]:
            width = hi - lo
            lo -= 0.5 * width
            hi += 0.5 * width
            continue
        idx = np.nonzero(mask)[0]
        return float(grid[idx[0]]), float(grid[idx[-1]]), peak
    raise GridCoverageError("could not bracket the wavefunction support")


def wigner_transform(
    wavefunction_sampler: Callable[[np.ndarray], np.ndarray],
    grid: GridSpec,
    system: OscillatorSystemSpec,
    time_stamp: float = 0.0,
    y_step: float | None = None,
    envelope_cutoff: float = 1e-12,
    coverage_tol: float = 1e-8,
) -> WignerField:
    """Wigner function of a pure state on a phase-space grid.

    Evaluates ``W(x, p) = (1/pi hbar) Re integral dy
    psi*(x + y) psi(x - y) exp(2 i p y / hbar)`` by a symmetric trapezoid sum
    whose step resolves both the grid's fastest phase and the state's own
    momentum content.

    Parameters
    ----------
    wavefunction_sampler : callable
        Vectorized map from positions to complex amplitudes.
    grid : GridSpec
        Output grid. The position axis must carry all but ``coverage_tol``
        of the state's norm.
    system : OscillatorSystemSpec
    time_stamp : float
        Recorded on the returned field.
    y_step : float, optional
        Override the half-difference quadrature step.
    envelope_cutoff : float
        Relative amplitude below which the state is treated as absent.
    coverage_tol : float
        Maximum norm fraction allowed outside the position axis.

    Returns
    -------
    WignerField

    Raises
    ------
    GridCoverageError
        If the grid misses more than ``coverage_tol`` of the state's norm.
    ValueError
        If the discarded imaginary residue exceeds 1e-10 of the field scale.
    """
    hbar = system.hbar
    x = grid.x
    p = grid.p

    probe_step = min(grid.dx, 0.05 * (x[-1] - x[0]))
    lo, hi, _ = _support_interval(
        wavefunction_sampler, float(x[0]), float(x[-1]), probe_step, envelope_cutoff
    )

    fine = np.arange(lo, hi + probe_step / 4.0, probe_step / 4.0)
    dens = np.abs(wavefunction_sampler(fine)) ** 2
    total = _trapezoid(dens, probe_step / 4.0)
    inside_mask = (fine >= x[0]) & (fine <= x[-1])
    inside = _trapezoid(
        np.where(inside_mask, dens, 0.0), probe_step / 4.0
    )
    leak = 1.0 - inside / total
    if leak > coverage_tol:
        raise GridCoverageError(
            f"position grid misses {leak:.3e} of the state's norm "
            f"(allowed {coverage_tol:g})"
        )

    # Momentum scales: the output grid's own extreme and the state's
    # semiclassical content estimated from its support half-width.
    p_grid_max = float(np.max(np.abs(p)))
    p_state = (
        system.mass * system.renormalized_frequency * 0.5 * (hi - lo)
    )
    p_fast = max(p_grid_max, p_state)
    if y_step is None:
        y_step = 0.2 * hbar / p_fast
    half_width = 0.5 * (hi - lo)
    n_half = int(np.ceil(half_width / y_step)) + 1
    y = y_step * np.arange(-n_half, n_half + 1)
    w = np.ones(y.size)
    w[0] = w[-1] = 0.5

    # F[i, k] = w_k psi*(x_i + y_k) psi(x_i - y_k), assembled in row chunks
    # to bound the sampler's working set.
    f_mat = np.empty((x.size, y.size), dtype=complex)
    chunk = max(1, int(2e5 // y.size))
    for start in range(0, x.size, chunk):
        xs = x[start : start + chunk, None]
        plus = wavefunction_sampler((xs + y[None, :]).ravel()).reshape(-1, y.size)
        minus = wavefunction_sampler((xs - y[None, :]).ravel()).reshape(-1, y.size)
        f_mat[start : start + chunk] = np.conj(plus) * minus * w[None, :]

    values = np.empty((x.size, p.size))
    worst_imag = 0.0
    p_chunk = 512
    for start in range(0, p.size, p_chunk):
        pc = p[start : start + p_chunk]
        e_mat = np.exp(2j * np.outer(y, pc) / hbar)
        block = f_mat @ e_mat
        values[:, start : start + p_chunk] = block.real
        worst_imag = max(worst_imag, float(np.max(np.abs(block.imag))))
    values *= y_step / (np.pi * hbar)
    worst_imag *= y_step / (np.pi * hbar)

    scale = float(np.max(np.abs(values)))
    if worst_imag > 1e-10 * scale:
        raise ValueError(
            f"imaginary residue {worst_imag:.3e} exceeds 1e-10 of the field "
            f"scale {scale:.3e}"
        )
    return WignerField(
        x_grid=x,
        p_grid=p,
        values=values,
        time_stamp=time_stamp,
        notes=(f"y_step={y_step:.6e}", f"imag_residue={worst_imag:.3e}"),
    )


def exact_oscillator_wigner(
    n: int, x: np.ndarray, p: np.ndarray, system: OscillatorSystemSpec
) -> np.ndarray:
    """Closed-form Wigner function of eigenstate ``n``.

    ``W_n = ((-1)^n / (pi hbar)) exp(-z/2) L_n(z)`` with
    ``z = 4 H(x, p) / (hbar omega)``. Points with ``z/2 > 700`` return zero
    (the damped Laguerre product underflows there for the level range this
    closed form is used on).

    Parameters
    ----------
    n : int
        Level index.
    x, p : array_like
        Broadcastable position and momentum samples.
    system : OscillatorSystemSpec

    Returns
    -------
    numpy.ndarray
    """
    if n < 0:
        raise ValueError("level index must be non-negative")
    m = system.mass
    w = system.renormalized_frequency
    hbar = system.hbar
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    energy = p**2 / (2.0 * m) + 0.5 * m * w**2 * x**2
    z = 4.0 * energy / (hbar * w)
    with np.errstate(under="ignore"):
        t_prev = np.zeros_like(z)
        t_cur = np.exp(-0.5 * np.minimum(z, 1500.0))
        for k in range(n):
            t_next = ((2 * k + 1 - z) * t_cur - k * t_prev) / (k + 1)
            t_prev, t_cur = t_cur, t_next
    out = ((-1.0) ** n / (np.pi * hbar)) * t_cur
    return np.where(z > 1400.0, 0.0, out)


def density_matrix_from_wigner(
    field: WignerField,
    system: OscillatorSystemSpec,
    x: np.ndarray,
    x_prime: np.ndarray,
) -> np.ndarray:
    """Position-basis density matrix entries recovered from a Wigner field.

    ``rho(x, x') = integral dp W((x + x')/2, p) exp(i p (x - x') / hbar)``
    with the field's rows interpolated bicubically at the midpoints.

    Parameters
    ----------
    field : WignerField
    system : OscillatorSystemSpec
    x, x_prime : array_like
        Same-shape coordinate pairs.

    Returns
    -------
    numpy.ndarray
        Complex entries, one per pair.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if x.shape != x_prime.shape:
        raise ValueError("x and x_prime must have the same shape")
    mid = 0.5 * (x + x_prime)
    sep = x - x_prime
    if np.any(mid < field.x_grid[0]) or np.any(mid > field.x_grid[-1]):
        raise GridCoverageError("midpoint outside the field's position grid")

    rows = (mid - field.x_grid[0]) / field.dx
    n_p = field.p_grid.size
    out = np.empty(x.shape, dtype=complex)
    col_idx = np.arange(n_p, dtype=float)
    for i, (r, s) in enumerate(zip(rows.ravel(), sep.ravel())):
        line = ndimage.map_coordinates(
            field.values,
            [np.full(n_p, r), col_idx],
            order=3,
            mode="nearest",
        )
        phase = np.exp(1j * field.p_grid * s / system.hbar)
        out.ravel()[i] = complex(_trapezoid(line * phase, field.dp))
    return out
