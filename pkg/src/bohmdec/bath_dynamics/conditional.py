"""Conditional propagation: smearing kernel and slice-conditioned velocity.

Conditioning the evolved global Gaussian on a position slice of every mode
leaves the central oscillator described by the initial distribution smeared
with a kernel matrix that is strictly smaller than the traced-out one: the
slice retains which-path information. In the weak-coupling, small-angle
regime the kernel matrix is a spectral integral with the slow central
oscillation dropped, each mode's conditional peak is an affine function of
the central phase-space point, and the conditioned distribution at a slice
is a sum of two branch Gaussians in momentum plus a bounded interference
term. The velocity then follows from exact Gaussian moments; no momentum
grid is involved.
"""

from __future__ import annotations

import numpy as np

from ..bohm_velocity import (
    MInverseParams,
    SemiclassicalDecomposition,
    initial_velocity,
    validity_window,
)
from ..errors import DomainValidityError, UndefinedVelocityError
from ..phase_space import (
    ClassicalOrbit,
    EnergyBandState,
    OscillatorSystemSpec,
    WkbAmplitudes,
    band_wavefunction,
)
from ..quadratic_master import CaldeiraLeggettParams
from ._trig import one_minus_cos, sin_minus_u_cos, t_minus_sin
from .matrices import BathPropagators, _flip_time
from .sampling import CoherentBathSample
from .spectral import BathSpec, SpectralDensity

from dataclasses import dataclass

__all__ = [
    "ConditionalKernel",
    "cl_m_tilde_asymptote",
    "cl_sigma3_squared_asymptote",
    "conditional_kernel",
    "conditional_velocity",
    "m_tilde_matrix",
    "sigma3_squared",
]

_ENVELOPE_INCLUSION = 1e-6
_LOG_MASS_FLOOR = 700.0


def m_tilde_matrix(
    spectral: SpectralDensity, system: OscillatorSystemSpec, t: float
) -> np.ndarray:
    """Conditional smearing matrix at time ``t``.

    The entries are spectral integrals of ``(omega t - sin omega t)`` and
    ``(1 - cos omega t)`` combinations weighted by inverse powers of the mode
    frequency; all are evaluated with cancellation-safe forms so the
    ``t -> 0`` entry orders (``t^6``, ``t^5``, ``t^4``) come out clean.
    """
    if t < 0.0:
        raise ValueError("the conditional kernel is assembled forward in time")
    hbar = system.hbar
    m = system.mass

    def entry_xx(w: np.ndarray) -> np.ndarray:
        return (t_minus_sin(w * t) / (w * w)) ** 2

    def entry_xp(w: np.ndarray) -> np.ndarray:
        return t_minus_sin(w * t) * one_minus_cos(w * t) / w**3

    def entry_pp(w: np.ndarray) -> np.ndarray:
        return (one_minus_cos(w * t) / w) ** 2

    xx = 2.0 * hbar / m**2 * spectral.integrate(entry_xx, oscillation_time=t)
    xp = -2.0 * hbar / m * spectral.integrate(entry_xp, oscillation_time=t)
    pp = 2.0 * hbar * spectral.integrate(entry_pp, oscillation_time=t)
    return np.array([[xx, xp], [xp, pp]])


def sigma3_squared(
    spectral: SpectralDensity, system: OscillatorSystemSpec, t: float
) -> float:
    """Slice-information precision: the momentum weight the bath slice adds."""
    if t < 0.0:
        raise ValueError("the conditional kernel is assembled forward in time")

    def entry(w: np.ndarray) -> np.ndarray:
        return (sin_minus_u_cos(w * t) / (w * w)) ** 2

    return float(
        2.0 / (system.hbar * system.mass**2)
        * spectral.integrate(entry, oscillation_time=t)
    )


def cl_m_tilde_asymptote(
    cl_params: CaldeiraLeggettParams, system: OscillatorSystemSpec, t: float
) -> np.ndarray:
    """Log-cutoff asymptote of the smearing matrix for the ohmic density.

    Valid for ``ln(cutoff t) >> 1``. The additive constants are the exact
    tails of the cutoff-oscillation integrals (combinations of the Euler
    constant and ``ln 2``); dropping them costs several percent even at
    ``ln(cutoff t) = 5``.
    """
    log_cut = np.log(cl_params.cutoff * t)
    if log_cut <= 0.0:
        raise ValueError("the log asymptote needs cutoff * t > 1")
    hbar = system.hbar
    m = system.mass
    gamma = cl_params.damping_rate
    euler = np.euler_gamma
    xx = 4.0 * hbar * gamma * t**2 / (np.pi * m) * (log_cut + euler - np.log(2.0) - 0.5)
    xp = -4.0 * hbar * gamma * t / np.pi * (log_cut + euler - np.log(2.0))
    pp = 4.0 * hbar * m * gamma / np.pi * 1.5 * (log_cut + euler - np.log(2.0) / 3.0)
    return np.array([[xx, xp], [xp, pp]])


def cl_sigma3_squared_asymptote(
    cl_params: CaldeiraLeggettParams, system: OscillatorSystemSpec, t: float
) -> float:
    """Log-cutoff asymptote of the slice precision for the ohmic density."""
    log_cut = np.log(cl_params.cutoff * t)
    if log_cut <= 0.0:
        raise ValueError("the log asymptote needs cutoff * t > 1")
    constant = np.log(2.0) + np.euler_gamma - 1.0
    return float(
        2.0
        * cl_params.damping_rate
        * t**2
        / (np.pi * system.hbar * system.mass)
        * (log_cut + constant)
    )


@dataclass(frozen=True)
class ConditionalKernel:
    """Slice-conditioned smearing data at one time.

    Attributes
    ----------
    time : float
    system : OscillatorSystemSpec
    bath : BathSpec
    sample : CoherentBathSample
        Coherent-state centers the conditioning is relative to.
    rotated_means : numpy.ndarray
        Freely evolved mode centers, shape ``(N, 2)``.
    response : numpy.ndarray
        Sensitivity of each mode's conditional peak to the central point,
        shape ``(N, 2, 2)``; row 0 is the peak position, row 1 its momentum.
    m_tilde : numpy.ndarray
        Conditional smearing matrix, 2x2.
    minv : MInverseParams or None
        Validated inverse-kernel parameters; ``None`` when the kernel is
        degenerate (no modes, or zero time).
    sigma3_sq : float
        Momentum precision contributed by a consistent slice.
    offset : numpy.ndarray
        Reported smearing-center offset, zeroed in the kernel unless
        ``offset_kept`` is set.
    offset_norm : float
    offset_kept : bool
    degenerate : bool
    """

    time: float
    system: OscillatorSystemSpec
    bath: BathSpec
    sample: CoherentBathSample
    rotated_means: np.ndarray
    response: np.ndarray
    m_tilde: np.ndarray
    minv: MInverseParams | None
    sigma3_sq: float
    offset: np.ndarray
    offset_norm: float
    offset_kept: bool
    degenerate: bool

    def conditional_peaks(self, x: float, p: float) -> np.ndarray:
        """Most likely slice position of every mode given the central point."""
        return (
            self.rotated_means[:, 0]
            - self.response[:, 0, 0] * x
            - self.response[:, 0, 1] * p
        )

    def conditional_momentum_peaks(self, x: float, p: float) -> np.ndarray:
        """Companion momentum centers of the conditional mode Gaussians."""
        return (
            self.rotated_means[:, 1]
            - self.response[:, 1, 0] * x
            - self.response[:, 1, 1] * p
        )

    def slice_quadratic(
        self, bath_slice: np.ndarray, x: float
    ) -> tuple[float, float, float]:
        """Coefficients ``(q0, q1, q2)`` of the slice weight exponent.

        The Gaussian slice factor contributes
        ``exp[-(q0 + q1 p + q2 p^2)]`` to every momentum integrand at fixed
        central position ``x``; ``q2`` equals the slice precision
        ``sigma3_sq`` up to discretization of the spectral integral.
        """
        bath_slice = np.asarray(bath_slice, dtype=float)
        if bath_slice.shape != (self.bath.n_modes,):
            raise ValueError(
                f"bath_slice must supply one position per mode "
                f"({self.bath.n_modes}), got shape {bath_slice.shape}"
            )
        scale = self.bath.masses * self.bath.frequencies / self.bath.hbar
        const = bath_slice - self.rotated_means[:, 0] + self.response[:, 0, 0] * x
        linear = self.response[:, 0, 1]
        q0 = float(np.dot(scale, const**2))
        q1 = 2.0 * float(np.dot(scale, const * linear))
        q2 = float(np.dot(scale, linear**2))
        return q0, q1, q2

    def validity_margins(self, orbit: ClassicalOrbit) -> dict[str, float]:
        """Spread margins of the branch decomposition under this kernel.

        Uses the same margin convention as the reduced-propagator window:
        values at or above one pass. The chord margin is reported for
        diagnosis but does not gate the velocity, because the interference
        term it controls is carried explicitly through its envelope bound.
        """
        if self.minv is None:
            raise ValueError("a degenerate kernel has no decomposition window")
        return dict(validity_window(self.minv, orbit, self.system).margins)


def conditional_kernel(
    props: BathPropagators,
    bath: BathSpec,
    sample: CoherentBathSample,
    t: float,
    keep_offset: bool = False,
    spectral: SpectralDensity | None = None,
) -> ConditionalKernel:
    """Assemble the slice-conditioning data from weak-coupling blocks.

    Parameters
    ----------
    props : BathPropagators
        Must be weak-coupling blocks with the small-angle flag: the kernel
        matrix drops the slow central oscillation, and mixing regimes would
        silently break the branch algebra.
    bath : BathSpec
    sample : CoherentBathSample
    t : float
        Must match the time the blocks were assembled at.
    keep_offset : bool
        Retain the smearing-center offset instead of zeroing it. The offset
        is reported either way.
    spectral : SpectralDensity, optional
        Density to quadrate the smearing matrix and slice precision over.
        Defaults to the line spectrum of ``bath``; pass the continuum parent
        density when the modes discretize one and the oscillation period
        ``2 pi / t`` is finer than the mode spacing, where the line sum
        aliases.

    Returns
    -------
    ConditionalKernel
    """
    if props.mode != "weak_coupling" or not props.small_angle:
        raise ValueError(
            "conditioning requires weak-coupling blocks with the small-angle flag"
        )
    if abs(t - props.time) > 1e-12 * max(1.0, abs(t)):
        raise ValueError("t does not match the time of the supplied blocks")
    if sample.n_modes != bath.n_modes or props.n_modes != bath.n_modes:
        raise ValueError("bath, sample and blocks disagree on the mode count")

    rotated = np.einsum("rij,rj->ri", props.d_free, sample.vectors())
    response = np.einsum("rij,rjk->rik", props.d_free, _flip_time(props.c))
    offset = np.einsum("rij,rj->i", _flip_time(props.b), rotated)

    if spectral is None:
        spectral = SpectralDensity.from_bath(bath)
    m_tilde = m_tilde_matrix(spectral, props.system, t)
    try:
        minv = MInverseParams.from_m_matrix(m_tilde)
        degenerate = False
    except ValueError:
        minv = None
        degenerate = True

    return ConditionalKernel(
        time=float(t),
        system=props.system,
        bath=bath,
        sample=sample,
        rotated_means=rotated,
        response=response,
        m_tilde=m_tilde,
        minv=minv,
        sigma3_sq=sigma3_squared(spectral, props.system, t),
        offset=offset,
        offset_norm=float(np.linalg.norm(offset)),
        offset_kept=bool(keep_offset),
        degenerate=degenerate,
    )


def _turning_zone_length(orbit: ClassicalOrbit, system: OscillatorSystemSpec) -> float:
    """Length scale of the quadratic turning zone at the orbit edge."""
    return float(
        (
            system.hbar**2
            / (2.0 * system.mass**2 * system.renormalized_frequency**2 * orbit.amplitude)
        )
        ** (1.0 / 3.0)
    )


def conditional_velocity(
    state: EnergyBandState,
    orbit: ClassicalOrbit,
    wkb: WkbAmplitudes,
    kernel: ConditionalKernel,
    x: float,
    bath_slice: np.ndarray,
) -> float:
    """Guidance velocity at ``x`` conditioned on a position slice of the modes.

    The conditioned distribution is assembled as the two branch Gaussians
    plus, when not negligible, the interference term taken at its envelope
    bound (unit phase), everything multiplied by the Gaussian slice weight.
    Each term is then an exact Gaussian in momentum, so the flux and density
    integrals reduce to closed-form masses and means, combined in the log
    domain.

    The position-spread margin of the decomposition and the turning-zone
    distance gate the evaluation; the chord margin is computed for diagnosis
    but does not gate, since the interference contribution it controls is
    carried explicitly as a bounded term. Branch amplitudes are those of the
    initial band state: in the regime where the kernel applies the slow
    central rotation is absorbed into the conditioning.

    Parameters
    ----------
    state : EnergyBandState
        Initial band state; used directly only when the kernel is degenerate
        and the velocity falls back to the pure-state value.
    orbit : ClassicalOrbit
    wkb : WkbAmplitudes
        Branch amplitudes of ``state`` on ``orbit``.
    kernel : ConditionalKernel
    x : float
    bath_slice : array_like
        One slice position per mode.

    Returns
    -------
    float

    Raises
    ------
    DomainValidityError
        Outside the allowed region, inside the turning zone, or when the
        position-spread margin fails.
    UndefinedVelocityError
        When every branch is absent at ``x`` or the slice weight suppresses
        all of them below the representable floor.
    """
    system = kernel.system
    mass = system.mass

    if kernel.degenerate:
        sampler = band_wavefunction(state, system)
        return float(initial_velocity(sampler, x, system))

    x_eval = float(x)
    if kernel.offset_kept:
        x_eval += float(kernel.offset[0])
    amplitude = orbit.amplitude
    if abs(x_eval) >= amplitude:
        raise DomainValidityError(
            f"x = {x_eval:g} lies outside the allowed region |x| < {amplitude:g}"
        )
    zone = _turning_zone_length(orbit, system)
    turning_margin = (amplitude - abs(x_eval)) / zone
    margins = kernel.validity_margins(orbit)
    if margins["position_spread"] < 1.0 or turning_margin < 1.0:
        failing = {"position_spread": margins["position_spread"], "turning_zone": turning_margin}
        failing = {k: v for k, v in failing.items() if v < 1.0}
        raise DomainValidityError(
            "conditional decomposition margins below 1: "
            + ", ".join(f"{k} = {v:.3g}" for k, v in failing.items())
        )

    decomp = SemiclassicalDecomposition(kernel.minv, orbit, wkb)
    p_cl = float(orbit.classical_momentum(x_eval))
    rho_plus = float(decomp.rho_plus(x_eval)[0])
    rho_minus = float(decomp.rho_minus(x_eval)[0])
    q0, q1, q2 = kernel.slice_quadratic(np.asarray(bath_slice, dtype=float), x_eval)

    log_masses: list[float] = []
    means: list[float] = []
    log_peaks: list[float] = []
    reference = -np.inf
    for sign, rho in ((1.0, rho_plus), (-1.0, rho_minus)):
        if rho <= 0.0:
            continue
        sigma = float(
            decomp.sigma_plus(x_eval)[0] if sign > 0 else decomp.sigma_minus(x_eval)[0]
        )
        curvature = sigma**2 + q2
        slope = 2.0 * sigma**2 * sign * p_cl - q1
        const = -(sigma**2) * p_cl**2 - q0 + np.log(sigma / np.sqrt(np.pi)) + np.log(rho)
        log_peak = const + slope**2 / (4.0 * curvature)
        log_masses.append(log_peak + 0.5 * np.log(np.pi / curvature))
        means.append(slope / (2.0 * curvature))
        log_peaks.append(log_peak)
        reference = max(
            reference, np.log(rho) + np.log(sigma) - 0.5 * np.log(curvature)
        )

    if not log_masses:
        raise UndefinedVelocityError(
            f"no branch density at x = {x_eval:g}; the conditioned velocity is undefined"
        )

    if rho_plus > 0.0 and rho_minus > 0.0:
        sigma1 = float(decomp.sigma_1(x_eval)[0])
        sigma2 = float(decomp.sigma_2(x_eval)[0])
        drift = float(decomp.beta(x_eval)[0])
        curvature = sigma2**2 + q2
        slope = -2.0 * sigma2**2 * drift * p_cl - q1
        const = (
            0.5 * np.log(4.0 * system.hbar * sigma1 * sigma2 * np.sqrt(kernel.minv.delta) / np.pi)
            + 0.5 * (np.log(rho_plus) + np.log(rho_minus))
            - sigma1**2 * p_cl**2
            - sigma2**2 * drift**2 * p_cl**2
            - q0
        )
        log_peak = const + slope**2 / (4.0 * curvature)
        if log_peak > max(log_peaks) + np.log(_ENVELOPE_INCLUSION):
            log_masses.append(log_peak + 0.5 * np.log(np.pi / curvature))
            means.append(slope / (2.0 * curvature))

    log_masses_arr = np.asarray(log_masses)
    top = float(log_masses_arr.max())
    if top < reference - _LOG_MASS_FLOOR:
        raise UndefinedVelocityError(
            "the bath slice suppresses every branch below the representable floor"
        )
    weights = np.exp(log_masses_arr - top)
    momentum = float(np.dot(weights, means) / weights.sum())
    if kernel.offset_kept:
        momentum -= float(kernel.offset[1])
    return momentum / mass
