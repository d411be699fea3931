"""Driven two-level emitter dynamics and input-output observables.

After displacing the coherent input field to a c-number, the emitter obeys a
Lindblad master equation with Hamiltonian

    H = -delta sigma_ee - omega_c (sigma_eg + sigma_ge)

and a single decay channel of total rate Gamma. The drive sign is the unique
choice for which the resonant steady-state coherence is +2i omega_c/Gamma at
weak drive, which is what the destructive-interference transmission dip and
the saturation closed forms require.

Detected fields are expressed through the scaled operators

    a_T = omega_c * 1 + i (gamma_pl/2) sigma_ge      (transmitted)
    a_R = i (gamma_pl/2) sigma_ge                    (reflected)

whose normally ordered moments, divided by omega_c^2, give the transmittance
and reflectance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import EmitterParams, InvariantViolation

__all__ = [
    "SIGMA_GE",
    "SIGMA_EG",
    "SIGMA_EE",
    "GROUND",
    "EXCITED",
    "FieldObservables",
    "Propagator",
    "PropagatorFamily",
    "liouvillian",
    "hamiltonian",
    "steady_state",
    "propagator",
    "propagate",
    "field_operator",
    "field_observables",
    "saturation_closed_form",
    "validate_density_matrix",
]

# Basis ordering: index 0 = |g>, index 1 = |e>.
GROUND = np.array([1.0, 0.0], dtype=complex)
EXCITED = np.array([0.0, 1.0], dtype=complex)
SIGMA_GE = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|
SIGMA_EG = SIGMA_GE.conj().T
SIGMA_EE = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)

_I2 = np.eye(2, dtype=complex)
_EIG_COND_LIMIT = 1e8


def hamiltonian(params: EmitterParams) -> np.ndarray:
    return -params.delta * SIGMA_EE - params.omega_c * (SIGMA_EG + SIGMA_GE)


def liouvillian(params: EmitterParams) -> np.ndarray:
    """Generator of the master equation as a 4x4 matrix over vec(rho).

    Row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho).
    """
    h = hamiltonian(params)
    gamma = params.gamma_total
    c = SIGMA_GE
    cdc = SIGMA_EG @ SIGMA_GE
    lv = -1j * (np.kron(h, _I2) - np.kron(_I2, h.T))
    lv += gamma * (
        np.kron(c, c.conj())
        - 0.5 * np.kron(cdc, _I2)
        - 0.5 * np.kron(_I2, cdc.T)
    )
    return lv


@dataclass(frozen=True)
class Propagator:
    """exp(L t) over vectorized density matrices."""

    matrix: np.ndarray
    duration: float

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.matrix @ np.asarray(rho, dtype=complex).reshape(4)).reshape(2, 2)

    def trace_defect(self) -> float:
        """Worst-case trace change over normalized inputs.

        The trace functional in vec form is the row (1, 0, 0, 1); a trace
        preserving map leaves it invariant under right action.
        """
        tr = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)
        return float(np.max(np.abs(tr @ self.matrix - tr)))

    def choi_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the Choi matrix (>= 0 for a CP map)."""
        choi = self.matrix.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
        choi = 0.5 * (choi + choi.conj().T)
        return float(np.linalg.eigvalsh(choi)[0])


class PropagatorFamily:
    """Evaluates exp(L t) for many t from one spectral decomposition.

    Falls back to scaling-and-squaring per call when the eigenvector matrix is
    too ill-conditioned to invert accurately (near exceptional points of the
    generator).
    """

    def __init__(self, params: EmitterParams):
        self.params = params
        self.generator = liouvillian(params)
        w, v = np.linalg.eig(self.generator)
        cond = np.linalg.cond(v)
        if math.isfinite(cond) and cond < _EIG_COND_LIMIT:
            self._eigenvalues = w
            self._vectors = v
            self._inverse = np.linalg.inv(v)
            self.diagonalizable = True
        else:
            self.diagonalizable = False

    def matrix(self, t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("propagation time must be >= 0")
        if self.diagonalizable:
            return (self._vectors * np.exp(self._eigenvalues * t)) @ self._inverse
        return scipy.linalg.expm(self.generator * t)

    def propagator(self, t: float) -> Propagator:
        return Propagator(self.matrix(t), float(t))


def propagator(params: EmitterParams, t: float) -> Propagator:
    return PropagatorFamily(params).propagator(t)


def propagate(params: EmitterParams, rho0: np.ndarray, t: float) -> np.ndarray:
    """Evolve rho0 for a time t (units 1/Gamma)."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (2, 2):
        raise ValueError("rho0 must be a 2x2 matrix")
    return propagator(params, t).apply(rho0)


def steady_state(params: EmitterParams) -> np.ndarray:
    """Unique stationary state of the generator, normalized to trace 1."""
    if params.gamma_total <= 0.0:
        raise ValueError("gamma_total must be positive for a steady state")
    lv = liouvillian(params)
    w, v = np.linalg.eig(lv)
    order = np.argsort(np.abs(w))
    if len(w) > 1 and abs(w[order[1]]) < 1e-10:
        raise InvariantViolation(
            "steady-state-degeneracy",
            f"second eigenvalue {w[order[1]]!r} too close to zero")
    rho = v[:, order[0]].reshape(2, 2)
    rho = rho / np.trace(rho)
    return 0.5 * (rho + rho.conj().T)


def field_operator(params: EmitterParams, branch: str) -> np.ndarray:
    """Scaled detected-field operator for a branch ('transmitted'/'reflected')."""
    source = 0.5j * params.gamma_pl * SIGMA_GE
    if branch == "transmitted":
        return params.omega_c * _I2 + source
    if branch == "reflected":
        return source
    raise ValueError(f"unknown branch {branch!r}")


@dataclass(frozen=True)
class FieldObservables:
    mean_transmitted: complex
    mean_reflected: complex
    transmittance: float
    reflectance: float
    loss: float


def field_observables(params: EmitterParams, rho: np.ndarray) -> FieldObservables:
    """Input-output observables of a state, normalized to the drive flux.

    T = <a_T^+ a_T>/omega_c^2 and R = <a_R^+ a_R>/omega_c^2; the loss channel
    carries gamma_pl * gamma_prime * rho_ee / (2 omega_c^2), which closes the
    flux balance T + R + loss = 1 exactly in steady state at any detuning.
    """
    if params.omega_c <= 0.0:
        raise ValueError("omega_c must be positive for normalized observables")
    rho = np.asarray(rho, dtype=complex)
    a_t = field_operator(params, "transmitted")
    a_r = field_operator(params, "reflected")
    flux = params.omega_c**2
    mean_t = complex(np.trace(rho @ a_t))
    mean_r = complex(np.trace(rho @ a_r))
    trans = float(np.real(np.trace(rho @ (a_t.conj().T @ a_t)))) / flux
    refl = float(np.real(np.trace(rho @ (a_r.conj().T @ a_r)))) / flux
    rho_ee = float(np.real(rho[1, 1]))
    loss = params.gamma_pl * params.gamma_prime * rho_ee / (2.0 * flux)
    return FieldObservables(mean_t, mean_r, trans, refl, loss)


def saturation_closed_form(purcell: float, omega_over_gamma: float) -> tuple[float, float]:
    """Steady-state (T, R) on resonance as closed forms of P and omega_c/Gamma."""
    x2 = 8.0 * omega_over_gamma**2
    if math.isinf(purcell):
        return x2 / (1.0 + x2), 1.0 / (1.0 + x2)
    if purcell < 0.0:
        raise ValueError("purcell must be >= 0")
    one_plus = (1.0 + purcell) ** 2
    t = (1.0 + one_plus * x2) / (one_plus * (1.0 + x2))
    if purcell == 0.0:
        r = 0.0
    else:
        r = (1.0 + 1.0 / purcell) ** (-2) / (1.0 + x2)
    return t, r


def validate_density_matrix(
    rho: np.ndarray,
    herm_tol: float = 1e-12,
    trace_tol: float = 1e-12,
    eig_floor: float = -1e-10,
) -> None:
    """Raise InvariantViolation unless rho is a valid density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise InvariantViolation("density-matrix-hermiticity")
    if abs(np.trace(rho) - 1.0) > trace_tol:
        raise InvariantViolation("density-matrix-trace")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] < eig_floor:
        raise InvariantViolation("density-matrix-positivity")
