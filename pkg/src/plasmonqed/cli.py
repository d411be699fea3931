"""Command-line front end producing figure-ready text datasets.

Every subcommand reads defaults, an optional ``key = value`` config file,
and ``--set key=value`` overrides, then writes a delimiter-separated table
with a commented header that echoes the resolved configuration. Output is
byte-identical for identical config and seed.

Exit codes: 0 success, 2 configuration error, 3 numerical postcondition
failure (the failing invariant name goes to stderr).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bloch import (
    SIGMA_GE,
    field_observables,
    saturation_closed_form,
    steady_state,
)
from .core import (
    InvariantViolation,
    gaussian_spectrum,
    params_from_purcell,
)
from .correlations import g2, g2_weakfield_analytic, jump_state
from .oracle import build_grid, scatter_wavepacket
from .scatter import pulse_averaged_rt, scatter_spectrum
from .storage import (
    ThreeLevelParams,
    conditional_mirror,
    matched_storage,
    run_transistor,
    store_photon,
    transistor_gain,
)

__all__ = ["main"]


class ConfigError(Exception):
    """Anything wrong with flags, keys, or values."""


_DEFAULTS = {
    "scatter": {"purcell": "20", "delta": "-5:5:201"},
    "saturation": {"purcell": "20", "omega": "0.001,0.01,0.1,0.3,1,3,10"},
    "g2": {
        "purcell": "0.6,1,1.5,2",
        "omega": "0.01",
        "branch": "transmitted",
        "tmax": "10",
        "n_times": "401",
    },
    "jump": {"purcell": "20", "omega": "0.001"},
    "oracle": {
        "purcell": "20",
        "sigma": "0.1",
        "n_modes": "250,500,1000,2000",
        "spacing": "0.08",
        "t_peak": "25",
        "t_final": "60",
    },
    "storage": {
        "purcell": "20",
        "gamma_es": "0",
        "duration": "50",
        "n_samples": "1501",
    },
    "transistor": {
        "purcell": "20",
        "branching": "20",
        "gate": "1",
        "signals": "20",
        "trials": "10000",
        "duration": "50",
    },
}


def _parse_float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _parse_floats(text: str, key: str) -> np.ndarray:
    """Scalar, comma list, or lo:hi:n linspace."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{key}: range syntax is lo:hi:n, got {text!r}")
        lo = _parse_float(parts[0], key)
        hi = _parse_float(parts[1], key)
        n = _parse_int(parts[2], key)
        if n < 2 or hi <= lo:
            raise ConfigError(f"{key}: need hi > lo and n >= 2 in {text!r}")
        return np.linspace(lo, hi, n)
    return np.array([_parse_float(p, key) for p in text.split(",") if p != ""])


def _parse_ints(text: str, key: str) -> list[int]:
    return [_parse_int(p, key) for p in text.split(",") if p != ""]


def _read_config_file(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    values: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _resolve_config(command: str, args) -> dict[str, str]:
    config = dict(_DEFAULTS[command])
    overrides: dict[str, str] = {}
    if args.config:
        overrides.update(_read_config_file(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, value = item.partition("=")
        overrides[key.strip()] = value.strip()
    for key, value in overrides.items():
        if key not in config:
            raise ConfigError(
                f"unknown config key {key!r} for {command} "
                f"(known: {', '.join(sorted(config))})")
        config[key] = value
    return config


def _format(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_dataset(out_path, command, config, seed, columns, rows,
                   summary=()):
    lines = [f"# plasmonqed {__version__}", f"# command = {command}",
             f"# seed = {seed}"]
    for key in sorted(config):
        lines.append(f"# {key} = {config[key]}")
    for entry in summary:
        lines.append(f"# {entry}")
    lines.append("# columns: " + " ".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise InvariantViolation(
                "dataset-column-count",
                f"row width {len(row)} != {len(columns)}")
        lines.append(" ".join(_format(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _map_ordered(fn, items, workers):
    if workers < 1:
        raise ConfigError("--workers must be >= 1")
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def cmd_scatter(config, args):
    purcell = _parse_float(config["purcell"], "purcell")
    deltas = _parse_floats(config["delta"], "delta")
    params = params_from_purcell(purcell)
    points = scatter_spectrum(params, deltas)
    rows = [(p.delta, p.reflectance, p.transmittance, p.loss) for p in points]
    _write_dataset(args.out, "scatter", config, args.seed,
                   ["delta", "R", "T", "kappa"], rows)


def cmd_saturation(config, args):
    purcell = _parse_float(config["purcell"], "purcell")
    omegas = _parse_floats(config["omega"], "omega")
    rows = []
    for omega in omegas:
        if omega <= 0:
            raise ConfigError("omega: drive strengths must be positive")
        t_closed, r_closed = saturation_closed_form(purcell, omega)
        params = params_from_purcell(purcell, omega_c=omega)
        obs = field_observables(params, steady_state(params))
        rows.append((omega, t_closed, r_closed,
                     obs.transmittance, obs.reflectance))
    _write_dataset(args.out, "saturation", config, args.seed,
                   ["omega", "T_closed", "R_closed", "T_numeric", "R_numeric"],
                   rows)


def _g2_worker(task):
    purcell, omega, branch, tmax, n_times = task
    params = params_from_purcell(purcell, omega_c=omega)
    times = np.linspace(0.0, tmax, n_times)
    return g2(params, branch, times).values


def cmd_g2(config, args):
    purcells = _parse_floats(config["purcell"], "purcell")
    omega = _parse_float(config["omega"], "omega")
    branch = config["branch"]
    if branch not in ("transmitted", "reflected"):
        raise ConfigError(f"branch: must be transmitted or reflected, "
                          f"got {branch!r}")
    if omega <= 0:
        raise ConfigError("omega: must be positive")
    tmax = _parse_float(config["tmax"], "tmax")
    n_times = _parse_int(config["n_times"], "n_times")
    if tmax <= 0 or n_times < 2:
        raise ConfigError("need tmax > 0 and n_times >= 2")
    times = np.linspace(0.0, tmax, n_times)
    tasks = [(float(p), omega, branch, tmax, n_times) for p in purcells]
    curves = _map_ordered(_g2_worker, tasks, args.workers)
    columns = ["t"] + [f"g2_P{p:g}" for p in purcells]
    table = [times] + list(curves)
    if branch == "transmitted":
        columns += [f"analytic_P{p:g}" for p in purcells]
        table += [g2_weakfield_analytic(float(p), times) for p in purcells]
    rows = list(zip(*table))
    _write_dataset(args.out, "g2", config, args.seed, columns, rows)


def cmd_jump(config, args):
    purcell = _parse_float(config["purcell"], "purcell")
    omegas = _parse_floats(config["omega"], "omega")
    rows = []
    for omega in omegas:
        if omega <= 0:
            raise ConfigError("omega: drive strengths must be positive")
        params = params_from_purcell(purcell, omega_c=omega)
        state = jump_state(params, branch="transmitted")
        rho_ss = steady_state(params)
        coherence = complex(np.trace(state.rho_jump @ SIGMA_GE))
        coherence /= complex(np.trace(rho_ss @ SIGMA_GE))
        rows.append((omega, coherence.real, state.amplitude_ratio.real,
                     1.0 + purcell, -(purcell**2 - 1.0)))
    _write_dataset(args.out, "jump", config, args.seed,
                   ["omega", "coherence_ratio", "amplitude_ratio",
                    "coherence_weak_limit", "amplitude_weak_limit"], rows)


def _oracle_worker(task):
    n_modes, purcell, sigma, spacing, t_peak, t_final = task
    params = params_from_purcell(purcell)
    grid = build_grid(params, n_modes, k_span=spacing * n_modes)
    pulse = gaussian_spectrum(sigma)
    result = scatter_wavepacket(grid, pulse, t_final=t_final, t_peak=t_peak)
    return result.r_sim, result.t_sim, result.loss_sim


def cmd_oracle(config, args):
    purcell = _parse_float(config["purcell"], "purcell")
    sigma = _parse_float(config["sigma"], "sigma")
    n_modes = _parse_ints(config["n_modes"], "n_modes")
    spacing = _parse_float(config["spacing"], "spacing")
    t_peak = _parse_float(config["t_peak"], "t_peak")
    t_final = _parse_float(config["t_final"], "t_final")
    if sigma <= 0 or spacing <= 0:
        raise ConfigError("sigma and spacing must be positive")
    if any(b >= a for a, b in zip(n_modes, n_modes[1:])):
        raise ConfigError("n_modes: must be strictly increasing")
    params = params_from_purcell(purcell)
    pulse = gaussian_spectrum(sigma)
    r_avg, t_avg, _ = pulse_averaged_rt(params, pulse)
    tasks = [(n, purcell, sigma, spacing, t_peak, t_final) for n in n_modes]
    results = _map_ordered(_oracle_worker, tasks, args.workers)
    rows = []
    for n, (r_sim, t_sim, loss_sim) in zip(n_modes, results):
        rows.append((n, abs(r_sim - r_avg), r_sim, t_sim, loss_sim))
    final_error = rows[-1][1]
    if not final_error < 1e-2:
        raise InvariantViolation(
            "oracle-final-error",
            f"|R_sim - R_avg| = {final_error!r} at n = {n_modes[-1]}")
    summary = (f"R_avg = {_format(r_avg)}", f"T_avg = {_format(t_avg)}")
    _write_dataset(args.out, "oracle", config, args.seed,
                   ["n_modes", "error", "R_sim", "T_sim", "loss_sim"],
                   rows, summary)


def _three_level_from(purcell: float, gamma_es: float) -> ThreeLevelParams:
    gamma_pl = purcell / (1.0 + purcell)
    other = 1.0 / (1.0 + purcell)
    if gamma_es < 0 or gamma_es > other + 1e-12:
        raise ConfigError(
            f"gamma_es: must lie in [0, {other:.6g}] for purcell={purcell:g}")
    return ThreeLevelParams(gamma_pl, max(0.0, other - gamma_es), gamma_es)


def cmd_storage(config, args):
    purcell = _parse_float(config["purcell"], "purcell")
    gamma_es = _parse_float(config["gamma_es"], "gamma_es")
    duration = _parse_float(config["duration"], "duration")
    n_samples = _parse_int(config["n_samples"], "n_samples")
    if duration <= 0 or n_samples < 16:
        raise ConfigError("need duration > 0 and n_samples >= 16")
    if purcell <= 0:
        raise ConfigError("purcell: must be positive")
    params = _three_level_from(purcell, gamma_es)
    matched = matched_storage(params, duration=duration, n_samples=n_samples)
    result = store_photon(params, matched.input, matched.store_control)
    t = matched.input.samples.grid
    e_in = matched.input.samples.values
    control = matched.store_control.samples.values
    c_e, c_s = result.amplitudes
    rows = list(zip(t, e_in.real, e_in.imag, control.real, control.imag,
                    np.abs(c_e.values) ** 2, np.abs(c_s.values) ** 2))
    summary = (f"efficiency = {_format(result.efficiency)}",
               f"leakage = {_format(result.leakage)}",
               f"loss = {_format(result.loss)}")
    _write_dataset(args.out, "storage", config, args.seed,
                   ["t", "E_in_re", "E_in_im", "control_re", "control_im",
                    "ce_abs2", "cs_abs2"], rows, summary)


def cmd_transistor(config, args):
    purcell = _parse_float(config["purcell"], "purcell")
    branching = _parse_float(config["branching"], "branching")
    gate = _parse_int(config["gate"], "gate")
    signals = _parse_int(config["signals"], "signals")
    trials = _parse_int(config["trials"], "trials")
    duration = _parse_float(config["duration"], "duration")
    if purcell <= 0:
        raise ConfigError("purcell: must be positive")
    if branching < purcell:
        raise ConfigError(
            "branching: Gamma_eg/Gamma_es cannot be below purcell "
            "(the pumping channel would need a negative rate)")
    if gate not in (0, 1):
        raise ConfigError("gate: must be 0 or 1")
    if signals < 0 or trials < 1 or duration <= 0:
        raise ConfigError("need signals >= 0, trials >= 1, duration > 0")
    gamma_es = 1.0 / (1.0 + branching)
    gamma_pl = purcell / (1.0 + purcell)
    gamma_prime_g = 1.0 / (1.0 + purcell) - gamma_es
    if gamma_prime_g < 0:
        gamma_prime_g = 0.0
    params = ThreeLevelParams(gamma_pl, gamma_prime_g, gamma_es)
    mirror = conditional_mirror("g", params.as_two_level())
    gain = transistor_gain(params, trials, args.seed)
    run = run_transistor(params, gate, signals, seed=args.seed,
                         storage_duration=duration)
    efficiency = (math.nan if run.storage_efficiency is None
                  else run.storage_efficiency)
    rows = [(efficiency, mirror.reflectance, mirror.transmittance,
             gain.mean, gain.ci95, gain.analytic_mean,
             run.reflected, run.transmitted,
             run.flip_occurred, run.gate_stored)]
    summary = (
        f"gain: {_format(gain.mean)} +- {_format(gain.ci95)} "
        f"(analytic {_format(gain.analytic_mean)})",
        f"routing: reflected {_format(run.reflected)}, "
        f"transmitted {_format(run.transmitted)} of {signals} signals",
    )
    _write_dataset(args.out, "transistor", config, args.seed,
                   ["storage_efficiency", "R_mirror", "T_mirror",
                    "gain_mean", "gain_ci95", "gain_analytic",
                    "reflected", "transmitted", "flip", "gate_stored"],
                   rows, summary)


_COMMANDS = {
    "scatter": cmd_scatter,
    "saturation": cmd_saturation,
    "g2": cmd_g2,
    "jump": cmd_jump,
    "oracle": cmd_oracle,
    "storage": cmd_storage,
    "transistor": cmd_transistor,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plasmonqed",
        description="Single-emitter waveguide scattering tool: spectra, "
                    "saturation, photon correlations, wavepacket checks, "
                    "storage, and transistor runs.")
    parser.add_argument("--version", action="version",
                        version=f"plasmonqed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name, help=f"{name} dataset")
        cmd.add_argument("--config", help="key = value config file")
        cmd.add_argument("--set", action="append", metavar="KEY=VALUE",
                         help="override one config key (repeatable)")
        cmd.add_argument("--out", help="output path (default: stdout)")
        cmd.add_argument("--seed", type=int, default=0,
                         help="random seed for stochastic commands")
        cmd.add_argument("--workers", type=int,
                         default=max(1, os.cpu_count() or 1),
                         help="worker processes for sweep points")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args.command, args)
        _COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
