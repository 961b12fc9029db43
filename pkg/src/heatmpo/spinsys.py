"""Two-level system: Hamiltonian, free pair propagators for the Trotterized
path sum, named initial states, observables, and the secular weak-coupling
reference dynamics.

Spin-1/2 operators (S = sigma/2) are used throughout; the system Hamiltonian
is H_S = omega0 * S_z + omega_tunnel * S_x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bathcorr import BathParams, spectral_value
from .errors import UnsupportedConfigError

SX = np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex)
SY = np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex)
SZ = np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SpinParams:
    """Bias omega0 (S_z coefficient) and tunnelling omega_tunnel (S_x)."""

    omega0: float
    omega_tunnel: float

    @property
    def hamiltonian(self) -> np.ndarray:
        return self.omega0 * SZ + self.omega_tunnel * SX

    @property
    def unbiased(self) -> bool:
        return self.omega0 == 0.0


def _unitary(params: SpinParams, dt: float) -> np.ndarray:
    """exp(-i H_S dt) in closed form for the 2x2 Hamiltonian."""
    freq = float(np.hypot(params.omega0, params.omega_tunnel))
    if freq == 0.0:
        return ID2.copy()
    phi = 0.5 * freq * dt
    n_dot_sigma = (params.omega0 * SZ + params.omega_tunnel * SX) * (2.0 / freq)
    return np.cos(phi) * ID2 - 1j * np.sin(phi) * n_dot_sigma


class SpinState:
    """Validated 2x2 density matrix in the S_z eigenbasis."""

    def __init__(self, rho, tol: float = 1e-12):
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > max(tol, 1e-10):
            raise ValueError(f"density matrix trace {np.trace(rho)} != 1")
        if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -tol:
            raise ValueError("density matrix has a negative eigenvalue")
        self.rho = rho

    def expect(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(op @ self.rho)))

    @property
    def s_x(self) -> float:
        return self.expect(SX)

    @property
    def s_y(self) -> float:
        return self.expect(SY)

    @property
    def s_z(self) -> float:
        return self.expect(SZ)

    def energy(self, params: SpinParams) -> float:
        return self.expect(params.hamiltonian)

    def entropy(self) -> float:
        """von Neumann entropy with eigenvalues floored at 1e-15."""
        evals = np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T))
        evals = np.clip(np.real(evals), 1e-15, None)
        return float(-np.sum(evals * np.log(evals)))

    @classmethod
    def up(cls) -> "SpinState":
        return cls(np.diag([1.0, 0.0]))

    @classmethod
    def down(cls) -> "SpinState":
        return cls(np.diag([0.0, 1.0]))

    @classmethod
    def right(cls) -> "SpinState":
        """S_x = +1/2 eigenstate."""
        return cls(0.5 * np.array([[1, 1], [1, 1]], dtype=complex))

    @classmethod
    def left(cls) -> "SpinState":
        """S_x = -1/2 eigenstate."""
        return cls(0.5 * np.array([[1, -1], [-1, 1]], dtype=complex))

    @classmethod
    def named(cls, name: str) -> "SpinState":
        try:
            return {"up": cls.up, "down": cls.down,
                    "right": cls.right, "left": cls.left}[name]()
        except KeyError:
            raise ValueError(f"unknown initial state {name!r}; "
                             "expected up, down, right or left") from None


@dataclass(frozen=True)
class FreePropagator:
    """Unitary pair superoperators G for a full step and a half step.

    G[sig', sig] = <s'+|exp(-i H_S dt)|s+> <s-|exp(+i H_S dt)|s'->, with the
    super-index sig = (s+, s-) flattened in row-major order, so that G acts
    on vec(rho).
    """

    step_full: np.ndarray
    step_half: np.ndarray
    delta: float


def free_propagator(params: SpinParams, delta: float) -> FreePropagator:
    if delta <= 0:
        raise ValueError("delta must be > 0")
    u_full = _unitary(params, delta)
    u_half = _unitary(params, 0.5 * delta)
    return FreePropagator(step_full=np.kron(u_full, u_full.conj()),
                          step_half=np.kron(u_half, u_half.conj()),
                          delta=delta)


def modified_initial(state: SpinState, params: SpinParams, delta: float) -> SpinState:
    """rho'(0) = exp(-i H_S delta/2) rho(0) exp(+i H_S delta/2)."""
    if delta == 0.0:
        return state
    u = _unitary(params, 0.5 * delta)
    return SpinState(u @ state.rho @ u.conj().T)


@dataclass(frozen=True)
class MarkovRates:
    """Weak-coupling summary: the quoted thermalisation rate
    gamma = (pi/4) J(Omega) coth(beta Omega / 2) and the equilibrium
    <S_x> = -(1/2) tanh(beta Omega / 2)."""

    gamma: float
    sx_eq: float


def markov_rates(params: SpinParams, bath: BathParams) -> MarkovRates:
    if not params.unbiased:
        raise UnsupportedConfigError(
            "weak-coupling reference defined for the unbiased model only")
    omega = params.omega_tunnel
    j_at = spectral_value(bath.spectral, omega)
    x = 0.5 * bath.beta * omega
    gamma = 0.25 * np.pi * j_at / np.tanh(x)
    return MarkovRates(gamma=float(gamma), sx_eq=float(-0.5 * np.tanh(x)))


def _lindblad_rhs(params: SpinParams, bath: BathParams):
    """Secular generator in the S_x eigenbasis, returned as a 4x4 matrix
    acting on vec(rho) in the S_z basis."""
    omega = params.omega_tunnel
    j_at = spectral_value(bath.spectral, omega)
    n_bose = 1.0 / np.expm1(bath.beta * omega)
    gamma_down = 0.5 * np.pi * j_at * (n_bose + 1.0)
    gamma_up = 0.5 * np.pi * j_at * n_bose

    # x-basis kets in the S_z basis
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
    minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0)
    lower = np.outer(minus, plus.conj())     # |-x><+x|
    raise_ = lower.conj().T

    ham = params.hamiltonian
    lio = -1j * (np.kron(ham, ID2) - np.kron(ID2, ham.T))
    for rate, op in ((gamma_down, lower), (gamma_up, raise_)):
        opd_op = op.conj().T @ op
        lio += rate * (np.kron(op, op.conj())
                       - 0.5 * np.kron(opd_op, ID2)
                       - 0.5 * np.kron(ID2, opd_op.T))
    return lio


def markov_reference(params: SpinParams, bath: BathParams, state: SpinState,
                     times: np.ndarray):
    """Secular Born-Markov dynamics on the given time grid.

    Returns arrays (s_x, s_z, delta_u) with
    delta_u(t) = Omega (<S_x>(t) - <S_x>(0)).  Classical fixed-step RK4
    with ten substeps per grid interval.
    """
    if not params.unbiased:
        raise UnsupportedConfigError(
            "Markovian reference defined for the unbiased model only")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise ValueError("need a one-dimensional, non-empty time grid")

    lio = _lindblad_rhs(params, bath)
    vec = state.rho.reshape(4).astype(complex)
    s_x = np.empty(times.size)
    s_z = np.empty(times.size)

    def record(i, v):
        rho = v.reshape(2, 2)
        s_x[i] = np.real(np.trace(SX @ rho))
        s_z[i] = np.real(np.trace(SZ @ rho))

    record(0, vec)
    for i in range(1, times.size):
        span = times[i] - times[i - 1]
        nsub = 10
        h = span / nsub
        for _ in range(nsub):
            k1 = lio @ vec
            k2 = lio @ (vec + 0.5 * h * k1)
            k3 = lio @ (vec + 0.5 * h * k2)
            k4 = lio @ (vec + h * k3)
            vec = vec + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        record(i, vec)

    delta_u = params.omega_tunnel * (s_x - s_x[0])
    return s_x, s_z, delta_u
