"""Ohmic spectral density, counting-field bath correlation integrals, and
their discretization into influence-functional coefficients.

The bath enters the dynamics only through three double-time-integrated
correlation functions.  With J(w) the spectral density, T the bath
temperature and u the counting field they read

    C (t,u) = int dw J/(2 w^2) sin(u w) [coth(w/2T)(sin wt - wt) - i(1 - cos wt)]
    A1(t,u) = int dw J/w^2 cos^2(u w/2) [coth(w/2T)(1 - cos wt) + i(sin wt - wt)]
    A2(t,u) = int dw J/w^2 sin^2(u w/2) [coth(w/2T)(1 - cos wt) + i(sin wt - wt)]

A1 and A2 are even in u, C is odd, and at u = 0 only A1 survives (the
standard influence-functional kernel).  Tables of discretized lag
coefficients combine the three kinds into the four (+,-) branch pairings.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError

KINDS = ("C", "A1", "A2")

# default quadrature window and tolerances
_OMEGA_WINDOW = 60.0        # upper cutoff in units of omega_c
_EPS_FRACTION = 1e-6        # lower cutoff in units of omega_c
_ABS_TOL = 1e-12            # per-coefficient absolute tolerance
_GL_ORDER = 16


@dataclass(frozen=True)
class SpectralDensity:
    """Ohmic bath, J(w) = 2 alpha w exp(-w/omega_c)."""

    alpha: float
    omega_c: float

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"coupling alpha must be >= 0, got {self.alpha}")
        if self.omega_c <= 0:
            raise ValueError(f"cutoff omega_c must be > 0, got {self.omega_c}")

    def value(self, omega):
        return spectral_value(self, omega)

    @property
    def reorganization_energy(self) -> float:
        """E_r = (1/2) int dw J(w)/w, exactly alpha*omega_c for this form."""
        return self.alpha * self.omega_c


@dataclass(frozen=True)
class BathParams:
    """Thermal bath: strictly positive temperature plus spectral density."""

    temperature: float
    spectral: SpectralDensity

    def __post_init__(self):
        if self.temperature <= 0:
            raise ValueError(
                f"temperature must be > 0 (zero-T runs unsupported), got {self.temperature}")

    @property
    def beta(self) -> float:
        return 1.0 / self.temperature


def spectral_value(spectral: SpectralDensity, omega) -> float:
    """J(w) = 2 alpha w exp(-w/omega_c) for w >= 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density defined for omega >= 0 only")
    out = 2.0 * spectral.alpha * w * np.exp(-w / spectral.omega_c)
    return float(out) if np.isscalar(omega) else out


def _coth_half(omega, temperature):
    """coth(w/2T) with a two-term Laurent branch for small arguments."""
    x = omega / (2.0 * temperature)
    out = np.empty_like(x)
    small = x < 1e-4
    xs = x[small]
    out[small] = 1.0 / xs + xs / 3.0
    xl = x[~small]
    out[~small] = 1.0 / np.tanh(xl)
    return out


def _versin(x):
    """1 - cos(x) evaluated as 2 sin^2(x/2); avoids cancellation for small x."""
    s = np.sin(0.5 * x)
    return 2.0 * s * s


def gauss_panels(a: float, b: float, width: float, order: int):
    """Composite Gauss-Legendre nodes/weights on [a, b] with panels no wider
    than `width`."""
    n_panels = max(1, int(math.ceil((b - a) / width)))
    edges = np.linspace(a, b, n_panels + 1)
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _eta_batch(kind: str, bath: BathParams, times: np.ndarray, u: float,
               order: int = _GL_ORDER) -> np.ndarray:
    """eta^kind(t, u) for an array of times on a single frequency grid.

    The panel width resolves the fastest oscillation present, set by the
    largest time in the batch (and by u)."""
    sd = bath.spectral
    alpha, wc, temp = sd.alpha, sd.omega_c, bath.temperature
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("correlation times must be >= 0")

    upper = _OMEGA_WINDOW * wc
    eps = _EPS_FRACTION * wc
    t_osc = max(float(times.max(initial=0.0)), abs(u), 1e-30)
    width = min(math.pi / (4.0 * t_osc), 0.5 * wc)
    nodes, weights = gauss_panels(eps, upper, width, order)

    pref = 2.0 * alpha * np.exp(-nodes / wc) / nodes          # J/w^2
    coth = _coth_half(nodes, temp)
    if kind == "A1":
        ufac = pref * np.cos(0.5 * u * nodes) ** 2
    elif kind == "A2":
        ufac = pref * np.sin(0.5 * u * nodes) ** 2
    elif kind == "C":
        ufac = 0.5 * pref * np.sin(u * nodes)
    else:
        raise ValueError(f"unknown correlation kind {kind!r}")

    out = np.empty(times.shape, dtype=complex)
    chunk = max(1, int(4e6 // max(nodes.size, 1)))
    for lo in range(0, times.size, chunk):
        ts = times[lo:lo + chunk, None]
        wt = nodes[None, :] * ts
        one_m_cos = _versin(wt)
        sin_m_wt = np.sin(wt) - wt
        if kind == "C":
            integrand = ufac * (coth * sin_m_wt - 1j * one_m_cos)
        else:
            integrand = ufac * (coth * one_m_cos + 1j * sin_m_wt)
        out[lo:lo + chunk] = integrand @ weights

    if kind == "A1":
        # analytic first-order Taylor segment over (0, eps); the integrand
        # tends to 2 alpha T t^2 with slope -2 alpha T t^2 / omega_c
        lim = 2.0 * alpha * temp * times ** 2
        out += lim * eps * (1.0 - 0.5 * eps / wc)
    out[times == 0.0] = 0.0
    return out


def eta_continuous(kind: str, bath: BathParams, t: float, u: float,
                   abs_tol: float = _ABS_TOL) -> complex:
    """Double-time-integrated correlation eta^kind(t, u) by adaptive panel
    quadrature, certified by node doubling to `abs_tol`."""
    if t < 0:
        raise ValueError("time must be >= 0")
    if t == 0.0:
        return 0.0 + 0.0j
    coarse = _eta_batch(kind, bath, np.array([t]), u, order=_GL_ORDER)[0]
    fine = _eta_batch(kind, bath, np.array([t]), u, order=2 * _GL_ORDER)[0]
    if abs(fine - coarse) > abs_tol:
        raise AccuracyError(
            f"eta^{kind}(t={t}, u={u}) quadrature missed tol {abs_tol:.1e}",
            estimate=fine, achieved_tol=abs(fine - coarse))
    return complex(fine)


@dataclass(frozen=True)
class EtaTable:
    """Discretized influence-functional coefficients eta^{qq'}_{dk}(u).

    `coeffs[(q, qp)]` holds the lag array for the branch pairing (q, qp),
    q, qp in {'+', '-'}, indexed by dk = 0 .. depth.
    """

    delta: float
    depth: int
    u: float
    coeffs: dict = field(repr=False)
    scheme: str = "cell"
    memory_warning: bool = False

    def coeff(self, q: str, qp: str, dk: int) -> complex:
        if not 0 <= dk <= self.depth:
            raise ValueError(f"lag {dk} outside table depth {self.depth}")
        return complex(self.coeffs[(q, qp)][dk])

    def branch_matrix(self, dk: int) -> np.ndarray:
        """2x2 array [[++, +-], [-+, --]] at the given lag."""
        return np.array([[self.coeff("+", "+", dk), self.coeff("+", "-", dk)],
                         [self.coeff("-", "+", dk), self.coeff("-", "-", dk)]])

    @property
    def tail_ratio(self) -> float:
        """max_{qq'} |eta_K| / max_{qq'} |eta_0|; decay diagnostic."""
        top = max(abs(v[self.depth]) for v in self.coeffs.values())
        bot = max(abs(v[0]) for v in self.coeffs.values())
        return top / bot if bot > 0 else 0.0


def build_eta_table(bath: BathParams, delta: float, depth: int, u: float,
                    scheme: str = "cell",
                    memory_time: float | None = None,
                    abs_tol: float = _ABS_TOL) -> EtaTable:
    """Build the lag-coefficient table for a time step `delta` and memory
    depth `depth`.

    The default `cell` scheme integrates the correlation kernel over full
    time cells: the lag-dk coefficient of each kind is the second difference
    eta((dk+1)D) - 2 eta(dk D) + eta((dk-1) D) and the self-coefficient is
    eta(D).  The `point` scheme evaluates eta at the lag times directly;
    it is exposed for comparison only.
    """
    if delta <= 0:
        raise ValueError("delta must be > 0")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if scheme not in ("cell", "point"):
        raise ValueError(f"unknown discretization scheme {scheme!r}")

    times = delta * np.arange(depth + 2, dtype=float)
    per_kind = {}
    for kind in KINDS:
        coarse = _eta_batch(kind, bath, times, u, order=_GL_ORDER)
        fine = _eta_batch(kind, bath, times, u, order=2 * _GL_ORDER)
        err = float(np.max(np.abs(fine - coarse)))
        if err > abs_tol:
            raise AccuracyError(
                f"eta^{kind} table quadrature missed tol {abs_tol:.1e}",
                estimate=fine, achieved_tol=err)
        if scheme == "cell":
            lags = np.empty(depth + 1, dtype=complex)
            lags[0] = fine[1]
            lags[1:] = fine[2:] - 2.0 * fine[1:-1] + fine[:-2]
        else:
            lags = fine[:depth + 1].copy()
        per_kind[kind] = lags

    a1, a2, cc = per_kind["A1"], per_kind["A2"], per_kind["C"]
    coeffs = {
        ("+", "+"): a1 + a2,
        ("-", "-"): np.conj(a1 + a2),
        ("-", "+"): a2 - a1 + 2.0 * cc,
        ("+", "-"): np.conj(a2 - a1 - 2.0 * cc),
    }

    warn = False
    if memory_time is not None and depth * delta < memory_time:
        warn = True
        warnings.warn(
            f"memory window K*delta = {depth * delta:g} is shorter than the "
            f"declared memory time {memory_time:g}; coefficients are still "
            "sizeable at the window edge", stacklevel=2)

    return EtaTable(delta=delta, depth=depth, u=u, coeffs=coeffs,
                    scheme=scheme, memory_warning=warn)
