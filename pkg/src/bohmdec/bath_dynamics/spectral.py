"""Explicit oscillator environments and their spectral densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._quadrature import panel_quadrature
from ..phase_space import OscillatorSystemSpec
from ..quadratic_master import CaldeiraLeggettParams

__all__ = [
    "BathSpec",
    "SpectralDensity",
    "counterterm_bare_frequency",
    "discretize_spectral_density",
]


def _readonly(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class BathSpec:
    """A finite collection of harmonic modes bilinearly coupled in position.

    Attributes
    ----------
    masses, frequencies, couplings : numpy.ndarray
        Per-mode mass, angular frequency and coupling constant; equal-length
        one-dimensional arrays. Masses and frequencies must be positive,
        couplings may carry either sign.
    thermal_energy : float
        ``k_B T`` of the thermal preparation; strictly positive.
    hbar : float
    """

    masses: np.ndarray
    frequencies: np.ndarray
    couplings: np.ndarray
    thermal_energy: float
    hbar: float = 1.0

    def __post_init__(self) -> None:
        masses = _readonly(np.atleast_1d(self.masses))
        frequencies = _readonly(np.atleast_1d(self.frequencies))
        couplings = _readonly(np.atleast_1d(self.couplings))
        if not masses.shape == frequencies.shape == couplings.shape or masses.ndim != 1:
            raise ValueError("masses, frequencies and couplings must be 1-D and equal length")
        if np.any(masses <= 0.0) or np.any(frequencies <= 0.0):
            raise ValueError("mode masses and frequencies must be positive")
        if self.thermal_energy <= 0.0:
            raise ValueError("thermal_energy must be positive")
        if self.hbar <= 0.0:
            raise ValueError("hbar must be positive")
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "couplings", couplings)

    @property
    def n_modes(self) -> int:
        return self.masses.size

    @property
    def thermal_ratios(self) -> np.ndarray:
        """``hbar omega_r / (k_B T)`` per mode, recomputed from the fields."""
        return self.hbar * self.frequencies / self.thermal_energy

    @property
    def coherent_widths(self) -> np.ndarray:
        """Ground-state position width ``sqrt(hbar / (m_r omega_r))`` per mode."""
        return np.sqrt(self.hbar / (self.masses * self.frequencies))

    @property
    def spectral_weights(self) -> np.ndarray:
        """Quadrature masses ``kappa_r^2 / (2 m_r omega_r)`` of the line spectrum."""
        return self.couplings**2 / (2.0 * self.masses * self.frequencies)


@dataclass(frozen=True)
class SpectralDensity:
    """Coupling-weighted density of environment modes.

    Two kinds are supported: ``discrete`` wraps a :class:`BathSpec` as a line
    spectrum whose lines carry the quadrature masses
    ``kappa_r^2 / (2 m_r omega_r)``, and ``ohmic`` is the sharply cut off
    linear form ``2 m gamma omega / pi`` on ``[0, cutoff]``, where ``m`` is
    the mass of the central oscillator.
    """

    kind: str
    bath: BathSpec | None = None
    damping_rate: float = 0.0
    cutoff: float = 0.0
    mass: float = 0.0
    abs_tol: float = field(default=1e-10, repr=False)

    def __post_init__(self) -> None:
        if self.kind == "discrete":
            if self.bath is None:
                raise ValueError("a discrete density requires a bath")
        elif self.kind == "ohmic":
            if self.damping_rate < 0.0:
                raise ValueError("damping_rate must be non-negative")
            if self.cutoff <= 0.0 or self.mass <= 0.0:
                raise ValueError("ohmic densities need a positive cutoff and mass")
        else:
            raise ValueError(f"unknown spectral density kind {self.kind!r}")

    @classmethod
    def from_bath(cls, bath: BathSpec) -> SpectralDensity:
        return cls(kind="discrete", bath=bath)

    @classmethod
    def from_ohmic(
        cls, system: OscillatorSystemSpec, damping_rate: float, cutoff: float
    ) -> SpectralDensity:
        return cls(
            kind="ohmic", damping_rate=damping_rate, cutoff=cutoff, mass=system.mass
        )

    @property
    def max_frequency(self) -> float:
        """Largest frequency carrying spectral weight."""
        if self.kind == "ohmic":
            return self.cutoff
        if self.bath.n_modes == 0:
            return 0.0
        return float(self.bath.frequencies.max())

    def evaluate(self, omega: np.ndarray) -> np.ndarray:
        """Pointwise density; only the ohmic kind is a function."""
        if self.kind != "ohmic":
            raise ValueError("pointwise evaluation is undefined for a line spectrum")
        omega = np.asarray(omega, dtype=float)
        inside = (omega >= 0.0) & (omega <= self.cutoff)
        return np.where(
            inside, 2.0 * self.mass * self.damping_rate * omega / np.pi, 0.0
        )

    def lines(self) -> tuple[np.ndarray, np.ndarray]:
        """Line positions and weights of a discrete density."""
        if self.kind != "discrete":
            raise ValueError("an ohmic density has no lines")
        return self.bath.frequencies, self.bath.spectral_weights

    def integrate(self, integrand, oscillation_time: float = 0.0) -> float:
        """``integral I(omega) f(omega) domega`` over the full support.

        Parameters
        ----------
        integrand : callable
            Vectorized ``f(omega)``. For a discrete density the result is the
            exact weighted line sum.
        oscillation_time : float
            When positive, the ohmic quadrature caps its panel width at an
            eighth of the ``2 pi / t`` oscillation period of ``f``.
        """
        if self.kind == "discrete":
            freqs, weights = self.lines()
            if freqs.size == 0:
                return 0.0
            return float(np.dot(weights, integrand(freqs)))
        width = self.cutoff / 8.0
        if oscillation_time > 0.0:
            width = min(width, np.pi / (4.0 * oscillation_time))
        return panel_quadrature(
            lambda w: self.evaluate(w) * integrand(w),
            0.0,
            self.cutoff,
            width,
            abs_tol=self.abs_tol,
        )


def discretize_spectral_density(
    cl_params: CaldeiraLeggettParams,
    system: OscillatorSystemSpec,
    n_modes: int,
    strategy: str = "midpoint",
) -> BathSpec:
    """Build a finite bath whose line spectrum converges to the ohmic density.

    Unit mode masses are used throughout; only the combination
    ``kappa_r^2 / m_r`` is physical, so the couplings absorb the choice. With
    the ``midpoint`` strategy the frequencies sit at cell centers
    ``(r - 1/2) cutoff / n_modes`` and the couplings reproduce the cell
    integrals ``kappa_r^2 = 2 m_r omega_r I(omega_r) domega`` of the ohmic
    form, making smooth spectral integrals second-order accurate in the cell
    width.

    Parameters
    ----------
    cl_params : CaldeiraLeggettParams
        Supplies the damping rate, the cutoff and the bath temperature.
    system : OscillatorSystemSpec
        Supplies the central mass entering the ohmic normalization and hbar.
    n_modes : int
    strategy : str
        Only ``"midpoint"`` is implemented.

    Returns
    -------
    BathSpec
    """
    if n_modes < 1:
        raise ValueError("n_modes must be at least 1")
    if strategy != "midpoint":
        raise ValueError(f"unknown discretization strategy {strategy!r}")
    if cl_params.thermal_energy <= 0.0:
        raise ValueError("a sampled bath needs a positive temperature")
    spacing = cl_params.cutoff / n_modes
    frequencies = (np.arange(n_modes) + 0.5) * spacing
    masses = np.ones(n_modes)
    density = 2.0 * system.mass * cl_params.damping_rate * frequencies / np.pi
    couplings = np.sqrt(2.0 * masses * frequencies * density * spacing)
    return BathSpec(
        masses=masses,
        frequencies=frequencies,
        couplings=couplings,
        thermal_energy=cl_params.thermal_energy,
        hbar=system.hbar,
    )


def counterterm_bare_frequency(bath: BathSpec, system: OscillatorSystemSpec) -> float:
    """Bare frequency that renormalizes to ``system.renormalized_frequency``.

    Coupling the modes shifts the central oscillator's effective squared
    frequency down by ``sum_r kappa_r^2 / (m m_r omega_r^2)``; starting from
    the returned value restores the requested physical frequency once the
    bath is attached.
    """
    shift = np.sum(
        bath.couplings**2 / (system.mass * bath.masses * bath.frequencies**2)
    )
    return float(np.sqrt(system.renormalized_frequency**2 + shift))
