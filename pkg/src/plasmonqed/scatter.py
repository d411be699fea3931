"""Closed-form single-photon scattering off the emitter.

The emitter acts as a saturable mirror for guided photons: on resonance a
strongly coupled emitter reflects nearly everything, and the linewidth of the
reflection spectrum is the total decay rate. The three probabilities
(reflection R, transmission T, loss kappa) satisfy R + T + kappa = 1 and the
coupling identity kappa = 2R/P.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .core import EmitterParams, InvariantViolation, PulseShape, UNIT_NORM

__all__ = [
    "ScatterPoint",
    "reflection_coefficient",
    "scatter_point",
    "scatter_spectrum",
    "pulse_averaged_rt",
]

_SUM_TOL = 1e-12
_QUAD_ABS_TOL = 1e-8
_QUAD_SUM_TOL = 1e-6


@dataclass(frozen=True)
class ScatterPoint:
    """Scattering outcome for one photon detuning."""

    delta: float
    r: complex
    t: complex
    reflectance: float
    transmittance: float
    loss: float


def reflection_coefficient(params: EmitterParams, delta: float | None = None) -> complex:
    """Amplitude reflection coefficient r(delta).

    r = -gamma_pl / (gamma_total - 2 i delta). A decoupled emitter
    (gamma_pl = 0) gives r = 0; the lossless limit gives |r(0)| = 1.
    """
    d = params.delta if delta is None else delta
    return -params.gamma_pl / (params.gamma_total - 2.0j * d)


def scatter_point(params: EmitterParams, delta: float | None = None) -> ScatterPoint:
    """Full (r, t, R, T, kappa) at a single detuning; t = 1 + r."""
    d = params.delta if delta is None else delta
    r = reflection_coefficient(params, d)
    t = 1.0 + r
    reflectance = abs(r) ** 2
    transmittance = abs(t) ** 2
    loss = 1.0 - reflectance - transmittance
    return ScatterPoint(float(d), r, t, reflectance, transmittance, loss)


def scatter_spectrum(
    params: EmitterParams, deltas: Sequence[float]
) -> list[ScatterPoint]:
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        raise ValueError("deltas must be non-empty")
    return [scatter_point(params, d) for d in deltas]


def pulse_averaged_rt(
    params: EmitterParams, spectrum: PulseShape
) -> tuple[float, float, float]:
    """Spectrally averaged (R, T, kappa) for a finite-bandwidth photon.

    ``spectrum`` is a unit-norm pulse sampled on a *frequency* grid; the
    averages are integrals of the single-photon probabilities against the
    spectral intensity |f(delta)|^2. A single-sample spectrum is treated as a
    monochromatic line. Adaptive quadrature with absolute tolerance 1e-8;
    finite sampling windows mean the caller is responsible for covering the
    pulse support (8 rms widths for the built-in Gaussian).
    """
    if spectrum.norm_convention != UNIT_NORM:
        raise ValueError("spectrum must be unit-normalized in frequency")
    grid = spectrum.samples.grid
    if len(grid) == 1:
        point = scatter_point(params, float(grid[0]))
        return point.reflectance, point.transmittance, point.loss

    intensity = CubicSpline(grid, np.abs(spectrum.samples.values) ** 2)

    def averaged(prob):
        value, _ = quad(
            lambda d: prob(d) * float(intensity(d)),
            grid[0], grid[-1], epsabs=_QUAD_ABS_TOL, epsrel=0.0, limit=400,
        )
        return value

    def refl(d):
        return abs(reflection_coefficient(params, d)) ** 2

    def trans(d):
        return abs(1.0 + reflection_coefficient(params, d)) ** 2

    r_bar = averaged(refl)
    t_bar = averaged(trans)
    k_bar = averaged(lambda d: 1.0 - refl(d) - trans(d))
    if abs(r_bar + t_bar + k_bar - 1.0) > _QUAD_SUM_TOL:
        raise InvariantViolation(
            "spectral-average-normalization",
            f"R + T + kappa = {r_bar + t_bar + k_bar!r}")
    return r_bar, t_bar, k_bar
