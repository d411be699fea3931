"""Shared domain types and unit conventions.

Everything internal works in units where the total emitter linewidth is 1:
times are measured in 1/Gamma, rates in Gamma. All physics downstream depends
only on the dimensionless combinations P = gamma_pl/gamma_prime, omega_c/Gamma
and delta/Gamma, so absolute rates are accepted but immediately reducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "InvariantViolation",
    "EmitterParams",
    "TimeSeries",
    "PulseShape",
    "make_params",
    "params_from_purcell",
    "gaussian_spectrum",
]


class InvariantViolation(RuntimeError):
    """A numerical postcondition failed; ``invariant`` names which one."""

    def __init__(self, invariant: str, message: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}" if message else invariant)


@dataclass(frozen=True)
class EmitterParams:
    """Rates of a driven two-level emitter coupled to the waveguide.

    gamma_pl    emission rate into the guided (waveguide) modes
    gamma_prime emission rate into every other channel
    omega_c     classical Rabi frequency of the displaced coherent drive
    delta       detuning of the drive/photon from the emitter transition
    """

    gamma_pl: float
    gamma_prime: float
    omega_c: float = 0.0
    delta: float = 0.0

    @property
    def gamma_total(self) -> float:
        return self.gamma_pl + self.gamma_prime

    @property
    def purcell(self) -> float:
        """P = gamma_pl / gamma_prime (inf when gamma_prime == 0)."""
        if self.gamma_prime == 0.0:
            return math.inf
        return self.gamma_pl / self.gamma_prime


def make_params(
    gamma_pl: float,
    gamma_prime: float,
    omega_c: float = 0.0,
    delta: float = 0.0,
    *,
    infinite_p: bool = False,
) -> EmitterParams:
    """Validate rates and build an EmitterParams.

    ``gamma_prime = 0`` (the lossless, infinite-Purcell limit) is allowed only
    when explicitly requested through ``infinite_p``, so a typo'd zero cannot
    silently change the physics.
    """
    for name, value in (("gamma_pl", gamma_pl), ("gamma_prime", gamma_prime),
                        ("omega_c", omega_c)):
        if not math.isfinite(value) or value < 0.0:
            raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
    if not math.isfinite(delta):
        raise ValueError(f"delta must be finite, got {delta!r}")
    if gamma_prime == 0.0 and not infinite_p:
        raise ValueError(
            "gamma_prime = 0 means an infinite Purcell factor; "
            "pass infinite_p=True if that is intended")
    if gamma_pl + gamma_prime <= 0.0:
        raise ValueError("gamma_pl + gamma_prime must be positive")
    return EmitterParams(float(gamma_pl), float(gamma_prime),
                         float(omega_c), float(delta))


def params_from_purcell(
    purcell: float,
    gamma_total: float = 1.0,
    omega_c: float = 0.0,
    delta: float = 0.0,
) -> EmitterParams:
    """Build parameters from (P, Gamma) instead of the two bare rates.

    Inverts P = gamma_pl/gamma_prime and Gamma = gamma_pl + gamma_prime:
    gamma_pl = Gamma * P/(1+P), gamma_prime = Gamma/(1+P).
    ``purcell = math.inf`` selects the lossless limit.
    """
    if not gamma_total > 0.0 or not math.isfinite(gamma_total):
        raise ValueError(f"gamma_total must be positive and finite, got {gamma_total!r}")
    if math.isinf(purcell) and purcell > 0:
        return make_params(gamma_total, 0.0, omega_c, delta, infinite_p=True)
    if not math.isfinite(purcell) or purcell < 0.0:
        raise ValueError(f"purcell must be >= 0, got {purcell!r}")
    gamma_pl = gamma_total * purcell / (1.0 + purcell)
    gamma_prime = gamma_total / (1.0 + purcell)
    return make_params(gamma_pl, gamma_prime, omega_c, delta)


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled signal; ``t0`` and ``dt`` in units of 1/Gamma.

    Also used for frequency-domain sampling, in which case ``t0``/``dt`` are
    the grid origin and spacing in units of Gamma.
    """

    t0: float
    dt: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("values must be a non-empty 1-D array")
        object.__setattr__(self, "values", values)

    @property
    def grid(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))

    def __len__(self) -> int:
        return len(self.values)


UNIT_NORM = "unit"
FLUX_NORM = "flux"

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class PulseShape:
    """Complex envelope of a photon wavepacket or a control field.

    ``norm_convention`` is either ``"unit"`` (sum |v|^2 dt == 1, enforced) or
    ``"flux"`` (arbitrary L2 norm; used for emitted fields and controls).
    """

    samples: TimeSeries
    norm_convention: str = UNIT_NORM

    def __post_init__(self):
        if self.norm_convention not in (UNIT_NORM, FLUX_NORM):
            raise ValueError(f"unknown norm convention {self.norm_convention!r}")
        if self.norm_convention == UNIT_NORM:
            n = self.squared_norm
            if abs(n - 1.0) > _NORM_TOL:
                raise ValueError(
                    f"unit-norm pulse has sum |v|^2 dt = {n!r}; "
                    f"expected 1 within {_NORM_TOL}")

    @property
    def squared_norm(self) -> float:
        v = self.samples.values
        return float(np.sum(np.abs(v) ** 2) * self.samples.dt)

    def normalized(self) -> "PulseShape":
        """Return a unit-norm copy (rescaled)."""
        n = self.squared_norm
        if n <= 0.0:
            raise ValueError("cannot normalize a zero pulse")
        scaled = self.samples.values / math.sqrt(n)
        return PulseShape(
            TimeSeries(self.samples.t0, self.samples.dt, scaled), UNIT_NORM)


def gaussian_spectrum(
    rms_bandwidth: float,
    center: float = 0.0,
    n_sigma: float = 8.0,
    n_samples: int = 1601,
) -> PulseShape:
    """Unit-norm Gaussian spectral envelope sampled on a frequency grid.

    ``rms_bandwidth`` is the rms width of the spectral intensity |f|^2, i.e.
    |f(delta)|^2 is a normal density with standard deviation ``rms_bandwidth``
    centered on ``center``. The grid spans ``center +- n_sigma * rms``.
    """
    if not rms_bandwidth > 0.0:
        raise ValueError("rms_bandwidth must be positive")
    if n_samples < 3:
        raise ValueError("n_samples must be at least 3")
    sigma = float(rms_bandwidth)
    lo = center - n_sigma * sigma
    hi = center + n_sigma * sigma
    grid = np.linspace(lo, hi, n_samples)
    dnu = grid[1] - grid[0]
    # field amplitude: |f|^2 Gaussian of rms sigma
    f = np.exp(-((grid - center) ** 2) / (4.0 * sigma**2)).astype(complex)
    f /= math.sqrt(np.sum(np.abs(f) ** 2) * dnu)
    return PulseShape(TimeSeries(float(lo), float(dnu), f), UNIT_NORM)
