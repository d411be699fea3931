"""Three-level emitter: photon storage, conditional mirror, transistor gain.

A metastable state |s> decoupled from the waveguide turns the emitter into a
state-controlled mirror. A classical control Omega(t) on the s-e transition
maps an incoming single photon onto |s> (storage); reading the same emitter
afterwards routes signal photons by reflection (state |g>) or transmission
(state |s>).

Single-excitation amplitude equations (times in 1/Gamma, Gamma the total
|e> linewidth including the control-free decay to |s>):

    generation:  dc_e/dt = (i delta - Gamma/2) c_e + i Omega(t) c_s
                 dc_s/dt = i conj(Omega(t)) c_e,      output v = sqrt(gamma_pl) c_e
    storage:     same plus the drive term  + sqrt(gamma_pl) E_in(t)  on c_e

Storage with the time reverse of a generation control and pulse is impedance
matched: a unit photon is stored with probability gamma_pl/Gamma, which is
the 1 - 1/P law at a large Purcell factor.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .core import (
    EmitterParams,
    FLUX_NORM,
    InvariantViolation,
    PulseShape,
    TimeSeries,
    UNIT_NORM,
    make_params,
)
from .scatter import ScatterPoint, scatter_point

__all__ = [
    "ThreeLevelParams",
    "StorageResult",
    "GainEstimate",
    "TransistorRun",
    "MatchedStorage",
    "gaussian_target",
    "generate_photon",
    "control_for_target_pulse",
    "store_photon",
    "matched_storage",
    "conditional_mirror",
    "transistor_gain",
    "run_transistor",
]

_ODE_RTOL = 1e-10
_ODE_ATOL = 1e-12
_CS_GUARD = 1e-6
_BOOKKEEPING_TOL = 1e-6
_FEASIBILITY_MARGIN = 1e-4


@dataclass(frozen=True)
class ThreeLevelParams:
    """Rates of the lambda system.

    gamma_pl       e -> g decay into the waveguide
    gamma_prime_g  e -> g decay into non-guided channels
    gamma_es       e -> s decay (optical pumping channel)
    delta          detuning of the photon/drive from the e-g transition
    control        optional classical control envelope Omega(t)
    """

    gamma_pl: float
    gamma_prime_g: float
    gamma_es: float
    delta: float = 0.0
    control: PulseShape | None = None

    def __post_init__(self):
        for name in ("gamma_pl", "gamma_prime_g", "gamma_es"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if self.gamma_total <= 0.0:
            raise ValueError("total decay rate must be positive")

    @property
    def gamma_eg(self) -> float:
        return self.gamma_pl + self.gamma_prime_g

    @property
    def gamma_total(self) -> float:
        return self.gamma_eg + self.gamma_es

    @property
    def purcell(self) -> float:
        """P = gamma_pl over everything that is not the waveguide."""
        other = self.gamma_prime_g + self.gamma_es
        if other == 0.0:
            return math.inf
        return self.gamma_pl / other

    def as_two_level(self, omega_c: float = 0.0) -> EmitterParams:
        """Two-level view for scattering off the g-e transition.

        Decay to |s> removes the photon from the guided mode, so it counts
        as part of the non-guided rate.
        """
        other = self.gamma_prime_g + self.gamma_es
        return make_params(self.gamma_pl, other, omega_c, self.delta,
                           infinite_p=(other == 0.0))

    def with_control(self, control: PulseShape) -> "ThreeLevelParams":
        return ThreeLevelParams(self.gamma_pl, self.gamma_prime_g,
                                self.gamma_es, self.delta, control)


@dataclass(frozen=True)
class StorageResult:
    efficiency: float
    leakage: float
    loss: float
    amplitudes: tuple[TimeSeries, TimeSeries]


@dataclass(frozen=True)
class GainEstimate:
    mean: float
    ci95: float
    analytic_mean: float


@dataclass(frozen=True)
class TransistorRun:
    reflected: float
    transmitted: float
    flip_occurred: bool
    gate_stored: bool
    storage_efficiency: float | None


@dataclass(frozen=True)
class MatchedStorage:
    """Impedance-matched (input, control) pair and the pulse it time-reverses."""

    input: PulseShape
    store_control: PulseShape
    generate_control: PulseShape
    target: PulseShape


def _check_grid(series: TimeSeries, other: TimeSeries) -> None:
    if (
        len(series) != len(other)
        or abs(series.t0 - other.t0) > 1e-9
        or abs(series.dt - other.dt) > 1e-12
    ):
        raise ValueError("pulse and control must share one time grid")


def _complex_spline(grid: np.ndarray, values: np.ndarray):
    re = CubicSpline(grid, np.real(values))
    im = CubicSpline(grid, np.imag(values))
    lo, hi = float(grid[0]), float(grid[-1])

    def evaluate(t: float) -> complex:
        if t < lo or t > hi:
            return 0.0 + 0.0j
        return complex(re(t), im(t))

    return evaluate


def _uniform_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise ValueError("t_grid must be a 1-D grid with at least 3 points")
    steps = np.diff(t)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
        raise ValueError("t_grid must be uniform and increasing")
    return t


def gaussian_target(duration: float, n_samples: int = 4001) -> PulseShape:
    """Unit-norm Gaussian envelope on [0, duration].

    The intensity rms width is duration/12, which keeps the truncated tails
    at the window edges below the storage error budgets.
    """
    if not duration > 0.0:
        raise ValueError("duration must be positive")
    t = np.linspace(0.0, duration, n_samples)
    sigma = duration / 12.0
    amp = np.exp(-((t - duration / 2.0) ** 2) / (4.0 * sigma**2)).astype(complex)
    dt = t[1] - t[0]
    amp /= math.sqrt(np.sum(np.abs(amp) ** 2) * dt)
    return PulseShape(TimeSeries(0.0, float(dt), amp), UNIT_NORM)


def generate_photon(
    params: ThreeLevelParams, t_grid
) -> tuple[PulseShape, float]:
    """Emit a photon from |s> under the control in ``params``.

    Returns the emitted waveguide envelope v(t) = sqrt(gamma_pl) c_e(t)
    (flux normalization: its squared norm is the emission efficiency) and
    the efficiency itself.
    """
    if params.control is None:
        raise ValueError("generation requires a control pulse in params")
    t = _uniform_grid(t_grid)
    omega = _complex_spline(params.control.samples.grid,
                            params.control.samples.values)
    gamma = params.gamma_total
    delta = params.delta
    root_pl = math.sqrt(params.gamma_pl)

    def rhs(time, y):
        c_e, c_s, _ = y
        om = omega(time)
        return [
            (1j * delta - gamma / 2.0) * c_e + 1j * om * c_s,
            1j * np.conj(om) * c_e,
            params.gamma_pl * abs(c_e) ** 2,
        ]

    sol = solve_ivp(
        rhs, (t[0], t[-1]), np.array([0.0, 1.0, 0.0], dtype=complex),
        method="DOP853", rtol=_ODE_RTOL, atol=_ODE_ATOL, dense_output=True,
        max_step=(t[-1] - t[0]) / 50.0,
    )
    if not sol.success:
        raise InvariantViolation("generation-integration", sol.message)
    states = sol.sol(t)
    efficiency = float(np.real(sol.y[2, -1]))
    residual = float(abs(sol.y[1, -1]) ** 2)
    if residual > 1e-3:
        warnings.warn(
            f"control leaves |c_s|^2 = {residual:.3g} undepleted",
            stacklevel=2)
    v = root_pl * states[0]
    pulse = PulseShape(TimeSeries(float(t[0]), float(t[1] - t[0]), v), FLUX_NORM)
    return pulse, efficiency


def control_for_target_pulse(
    params: ThreeLevelParams, target: PulseShape
) -> PulseShape:
    """Control that makes ``generate_photon`` emit ``target``.

    Inverts the generation equations: c_e is fixed by the target, |c_s|
    follows from norm bookkeeping, and the control is read off the c_e
    equation. Division is guarded at |c_s| < 1e-6; if the guard triggers
    while a non-negligible part of the target is still unemitted, the target
    demands more than the gamma_pl/Gamma efficiency bound and is rejected.
    """
    if params.gamma_pl <= 0.0:
        raise ValueError("gamma_pl must be positive to emit into the waveguide")
    t = target.samples.grid
    dt = target.samples.dt
    gamma = params.gamma_total
    delta = params.delta
    v = target.samples.values
    norm = float(np.sum(np.abs(v) ** 2) * dt)
    bound = params.gamma_pl / gamma
    if norm > bound + 1e-9:
        raise ValueError(
            f"target norm {norm:.6g} exceeds the efficiency bound "
            f"gamma_pl/Gamma = {bound:.6g}")
    c_e = v / math.sqrt(params.gamma_pl)
    ce_re = CubicSpline(t, np.real(c_e))
    ce_im = CubicSpline(t, np.imag(c_e))
    dce_re = ce_re.derivative()
    dce_im = ce_im.derivative()

    def ce(time):
        return complex(ce_re(time), ce_im(time))

    def numerator(time):
        dce = complex(dce_re(time), dce_im(time))
        return dce + (gamma / 2.0 - 1j * delta) * ce(time)

    def rhs(time, y):
        c_s = y[0]
        return [-np.conj(numerator(time)) * ce(time) / np.conj(c_s)]

    def guard(time, y):
        return abs(y[0]) - _CS_GUARD

    guard.terminal = True
    guard.direction = -1.0

    c_s0 = math.sqrt(max(0.0, 1.0 - abs(c_e[0]) ** 2))
    sol = solve_ivp(
        rhs, (t[0], t[-1]), np.array([c_s0], dtype=complex),
        method="DOP853", rtol=_ODE_RTOL, atol=_ODE_ATOL,
        dense_output=True, events=guard, max_step=(t[-1] - t[0]) / 50.0,
    )
    if not sol.success:
        raise InvariantViolation("control-inversion-integration", sol.message)
    t_stop = float(sol.t[-1])
    if sol.status == 1:  # guard fired
        remaining = float(np.sum(np.abs(v[t >= t_stop]) ** 2) * dt)
        if remaining > 1e-5:
            raise ValueError(
                f"target requires more than the gamma_pl/Gamma efficiency "
                f"bound: |c_s| hit the guard at t = {t_stop:.4g} with "
                f"{remaining:.3g} of the pulse unemitted")
    omega = np.zeros(len(t), dtype=complex)
    for i, time in enumerate(t):
        if time > t_stop:
            break
        c_s = complex(sol.sol(time)[0])
        if abs(c_s) < _CS_GUARD:
            break
        omega[i] = numerator(time) / (1j * c_s)
    return PulseShape(TimeSeries(float(t[0]), float(dt), omega), FLUX_NORM)


def store_photon(
    params: ThreeLevelParams,
    input_pulse: PulseShape,
    control: PulseShape,
    splitting: float = 0.5,
) -> StorageResult:
    """Drive the emitter with an incoming photon and a control; store on |s>.

    Only the even combination of the two propagation directions couples to
    the emitter. ``splitting`` is the power fraction sent in from the left;
    anything in the odd mode bypasses the emitter and counts as leakage.
    The outgoing field is E_out = E_in - sqrt(gamma_pl) c_e, and the
    probability bookkeeping  efficiency + leakage + loss = |E_in|^2  is
    enforced to 1e-6 (leakage includes any residual excited population).
    """
    if not 0.0 <= splitting <= 1.0:
        raise ValueError("splitting must lie in [0, 1]")
    _check_grid(input_pulse.samples, control.samples)
    t = input_pulse.samples.grid
    even_fraction = 0.5 + math.sqrt(splitting * (1.0 - splitting))
    even_amp = math.sqrt(even_fraction)
    e_in = _complex_spline(t, even_amp * input_pulse.samples.values)
    omega = _complex_spline(t, control.samples.values)
    gamma = params.gamma_total
    delta = params.delta
    root_pl = math.sqrt(params.gamma_pl)
    gamma_other = params.gamma_prime_g + params.gamma_es

    def rhs(time, y):
        c_e, c_s, _, _ = y
        om = omega(time)
        field = e_in(time)
        out_field = field - root_pl * c_e
        return [
            (1j * delta - gamma / 2.0) * c_e + 1j * om * c_s + root_pl * field,
            1j * np.conj(om) * c_e,
            gamma_other * abs(c_e) ** 2,
            abs(out_field) ** 2,
        ]

    sol = solve_ivp(
        rhs, (t[0], t[-1]), np.zeros(4, dtype=complex),
        method="DOP853", rtol=_ODE_RTOL, atol=_ODE_ATOL, dense_output=True,
        max_step=(t[-1] - t[0]) / 50.0,
    )
    if not sol.success:
        raise InvariantViolation("storage-integration", sol.message)
    c_e_end, c_s_end, loss_int, leak_int = sol.y[:, -1]
    budget = input_pulse.squared_norm
    efficiency = float(abs(c_s_end) ** 2)
    loss = float(np.real(loss_int))
    leakage = (float(np.real(leak_int)) + float(abs(c_e_end) ** 2)
               + (1.0 - even_fraction) * budget)
    if abs(efficiency + leakage + loss - budget) > _BOOKKEEPING_TOL:
        raise InvariantViolation(
            "storage-probability-bookkeeping",
            f"eff + leak + loss = {efficiency + leakage + loss!r}, "
            f"input norm = {budget!r}")
    states = sol.sol(t)
    dt = float(t[1] - t[0])
    amplitudes = (
        TimeSeries(float(t[0]), dt, states[0]),
        TimeSeries(float(t[0]), dt, states[1]),
    )
    return StorageResult(efficiency, leakage, loss, amplitudes)


def matched_storage(
    params: ThreeLevelParams, duration: float = 50.0, n_samples: int = 4001
) -> MatchedStorage:
    """Build the impedance-matched input and control for a Gaussian photon.

    The generation target is the Gaussian scaled to the largest feasible
    emission norm (the gamma_pl/Gamma bound for slow pulses, less for pulses
    faster than the linewidth); the storage pair is its time reverse.
    """
    shape = gaussian_target(duration, n_samples)
    t = shape.samples.grid
    dt = shape.samples.dt
    v0 = shape.samples.values
    c_tilde = np.abs(v0) ** 2 / params.gamma_pl
    cumulative = np.concatenate(
        ([0.0], np.cumsum((c_tilde[1:] + c_tilde[:-1]) * 0.5 * dt)))
    headroom = c_tilde + params.gamma_total * cumulative
    alpha2 = (1.0 - _FEASIBILITY_MARGIN) / float(np.max(headroom))
    target = PulseShape(
        TimeSeries(0.0, dt, v0 * math.sqrt(alpha2)), FLUX_NORM)
    generate_control = control_for_target_pulse(params, target)
    reversed_input = PulseShape(
        TimeSeries(0.0, dt, np.conj(target.samples.values[::-1])), FLUX_NORM
    ).normalized()
    store_control = PulseShape(
        TimeSeries(0.0, dt, np.conj(generate_control.samples.values[::-1])),
        FLUX_NORM)
    return MatchedStorage(reversed_input, store_control, generate_control,
                          target)


def conditional_mirror(
    state: str, params: EmitterParams, delta: float | None = None
) -> ScatterPoint:
    """Scattering seen by a guided photon for a given internal state."""
    d = params.delta if delta is None else float(delta)
    if state == "s":
        return ScatterPoint(d, 0.0 + 0.0j, 1.0 + 0.0j, 0.0, 1.0, 0.0)
    if state == "g":
        return scatter_point(params, d)
    raise ValueError(f"internal state must be 'g' or 's', got {state!r}")


def transistor_gain(
    params: ThreeLevelParams, n_trials: int, seed: int
) -> GainEstimate:
    """Monte Carlo mean number of g-preserving scatterings before a spin flip.

    Each scattering event flips the emitter to |s> with probability
    p = gamma_es / (gamma_eg + gamma_es); the count of photons routed before
    the flip is geometric with mean gamma_eg/gamma_es.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if params.gamma_es == 0.0:
        return GainEstimate(math.inf, 0.0, math.inf)
    p = params.gamma_es / (params.gamma_eg + params.gamma_es)
    rng = np.random.default_rng(seed)
    counts = rng.geometric(p, size=n_trials) - 1
    mean = float(np.mean(counts))
    if n_trials > 1:
        ci95 = 1.96 * float(np.std(counts, ddof=1)) / math.sqrt(n_trials)
    else:
        ci95 = math.inf
    return GainEstimate(mean, ci95, params.gamma_eg / params.gamma_es)


def run_transistor(
    params: ThreeLevelParams,
    gate_photon: int,
    signal_count: int,
    seed: int = 0,
    storage_duration: float = 50.0,
) -> TransistorRun:
    """End-to-end gate: store (or not) a gate photon, then route signals.

    The gate outcome and the optical-pumping flip photon are sampled with the
    seeded generator; reflected/transmitted are expected counts conditioned
    on that sampled path. While the emitter sits in |g> each signal photon
    reflects with the conditional-mirror R and is lost into the pumping
    channel with probability kappa * gamma_es/(gamma_prime_g + gamma_es); the
    photon that causes the flip is absorbed, and everything after the flip is
    transmitted.
    """
    if gate_photon not in (0, 1):
        raise ValueError("gate_photon must be 0 or 1")
    if signal_count < 0:
        raise ValueError("signal_count must be >= 0")
    rng = np.random.default_rng(seed)
    mirror = conditional_mirror("g", params.as_two_level(), params.delta)
    other = params.gamma_prime_g + params.gamma_es
    flip_prob = 0.0
    if params.gamma_es > 0.0 and other > 0.0:
        flip_prob = mirror.loss * params.gamma_es / other

    storage_efficiency = None
    stored = False
    if gate_photon == 1:
        matched = matched_storage(params, duration=storage_duration)
        outcome = store_photon(params, matched.input, matched.store_control)
        storage_efficiency = outcome.efficiency
        stored = bool(rng.random() < outcome.efficiency)

    if stored:
        return TransistorRun(0.0, float(signal_count), False, True,
                             storage_efficiency)

    if flip_prob > 0.0:
        flip_index = int(rng.geometric(flip_prob))
    else:
        flip_index = signal_count + 1  # never flips
    routed_as_g = min(signal_count, flip_index - 1)
    reflected = routed_as_g * mirror.reflectance
    transmitted = routed_as_g * mirror.transmittance
    flip_occurred = flip_index <= signal_count
    if flip_occurred:
        transmitted += float(signal_count - flip_index)
    return TransistorRun(float(reflected), float(transmitted), flip_occurred,
                         stored, storage_efficiency)
