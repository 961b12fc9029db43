"""Equilibrium heat-transfer predictors for the unbiased model.

Two asymptotic estimates of the heat dissipated during relaxation from a
product state:

* the additive ansatz, valid at high temperature and weak coupling, which
  adds the bare reorganisation energy to the spin's thermalisation energy;
* the variational polaron (Silbey-Harris) theory, where bath-mode
  displacements f(w) = g(w) phi(w) are chosen to minimise the
  Feynman-Bogoliubov free-energy bound, renormalising both the tunnelling
  amplitude and the reorganisation energy:

      phi(w)  = [1 + (W'/w) tanh(beta W'/2) coth(beta w/2)]^(-1)
      W'      = W exp[-(1/2) int dw J/w^2 phi^2 coth(beta w/2)]

  solved self-consistently; when several fixed points coexist the one with
  the smaller free-energy bound wins.  W' -> 0 marks the localized branch
  where the heat transfer collapses onto the bare reorganisation energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bathcorr import BathParams, _coth_half, gauss_panels
from .errors import NotConvergedError, UnsupportedConfigError
from .spinsys import SpinParams, SpinState

_MIX = 0.5
_MAX_ITER = 10_000
_FP_TOL = 1e-10
_GL_ORDER = 16


@dataclass(frozen=True)
class VariationalSolution:
    omega_renorm: float
    phi: object                  # callable phi(omega)
    e_r_renorm: float
    free_energy_bound: float
    iterations: int
    converged: bool
    omega_bare: float
    bath: BathParams


@dataclass(frozen=True)
class EquilibriumPrediction:
    mean_heat: float
    delta_u: float
    source: str


def _require_unbiased(spin: SpinParams):
    if not spin.unbiased:
        raise UnsupportedConfigError(
            "equilibrium predictors are defined for the unbiased model only")


def additive_prediction(spin: SpinParams, bath: BathParams,
                        state: SpinState) -> EquilibriumPrediction:
    """High-temperature ansatz: spin thermalises in its bare basis while the
    bath modes displace independently, contributing the full E_r."""
    _require_unbiased(spin)
    omega = spin.omega_tunnel
    h0 = state.energy(spin)
    therm = 0.5 * omega * math.tanh(0.5 * bath.beta * omega)
    return EquilibriumPrediction(
        mean_heat=bath.spectral.reorganization_energy + therm + h0,
        delta_u=-therm - h0,
        source="additive")


def _phi_factory(omega_renorm: float, bath: BathParams):
    beta = bath.beta
    if omega_renorm == 0.0:
        return lambda w: np.ones_like(np.asarray(w, dtype=float))
    tanh_fac = omega_renorm * math.tanh(0.5 * beta * omega_renorm)

    def phi(w):
        w = np.asarray(w, dtype=float)
        return 1.0 / (1.0 + tanh_fac * _coth_half(w, bath.temperature) / w)

    return phi


def _bath_nodes(bath: BathParams):
    wc = bath.spectral.omega_c
    return gauss_panels(1e-6 * wc, 60.0 * wc, 0.25 * wc, _GL_ORDER)


def _renorm_integral(omega_renorm: float, bath: BathParams, nodes, weights) -> float:
    """(1/2) int dw J/w^2 phi^2 coth(beta w/2)."""
    sd = bath.spectral
    phi = _phi_factory(omega_renorm, bath)(nodes)
    integrand = (sd.alpha * np.exp(-nodes / sd.omega_c) / nodes
                 * phi ** 2 * _coth_half(nodes, bath.temperature))
    return float(integrand @ weights)


def _fixed_point_map(omega_renorm: float, spin: SpinParams, bath: BathParams,
                     nodes, weights) -> float:
    expo = _renorm_integral(omega_renorm, bath, nodes, weights)
    if expo > 700.0:
        return 0.0
    return spin.omega_tunnel * math.exp(-expo)


def e_r_renormalized(omega_renorm: float, bath: BathParams) -> float:
    """E_r' = (1/2) int dw J(w) phi(w) / w."""
    nodes, weights = _bath_nodes(bath)
    sd = bath.spectral
    phi = _phi_factory(omega_renorm, bath)(nodes)
    return float((sd.alpha * np.exp(-nodes / sd.omega_c) * phi) @ weights)


def free_energy_bound(omega_renorm: float, spin: SpinParams, bath: BathParams) -> float:
    """Feynman-Bogoliubov bound with the displacement constant expressed as
    the continuum integral int dw J phi (phi - 2) / (4 w)."""
    nodes, weights = _bath_nodes(bath)
    sd = bath.spectral
    phi = _phi_factory(omega_renorm, bath)(nodes)
    shift = float((0.5 * sd.alpha * np.exp(-nodes / sd.omega_c)
                   * phi * (phi - 2.0)) @ weights)
    x = 0.5 * bath.beta * omega_renorm
    ln_part = abs(x) + math.log1p(math.exp(-2.0 * abs(x)))  # ln(2 cosh x)
    return shift - bath.temperature * ln_part


def solve_silbey_harris(spin: SpinParams, bath: BathParams) -> VariationalSolution:
    """Self-consistent renormalised tunnelling amplitude.

    Damped fixed-point iteration from the bare amplitude, a bisection scan
    for coexisting roots, and free-energy-bound comparison for branch
    selection.  The localized branch W' = 0 is always a candidate.
    """
    _require_unbiased(spin)
    omega = spin.omega_tunnel
    if omega < 0:
        raise ValueError("omega_tunnel must be >= 0")
    nodes, weights = _bath_nodes(bath)

    candidates = {0.0}
    iterations = 0
    converged = True
    if omega > 0.0:
        x = omega
        for iterations in range(1, _MAX_ITER + 1):
            target = _fixed_point_map(x, spin, bath, nodes, weights)
            nxt = (1.0 - _MIX) * x + _MIX * target
            if abs(nxt - x) < _FP_TOL * omega:
                x = nxt
                break
            x = nxt
        else:
            converged = False
        residual = abs(x - _fixed_point_map(x, spin, bath, nodes, weights))
        if converged and residual < 1e-8 * omega and x > 1e-8 * omega:
            candidates.add(x)

        # bracket further roots of g(x) = x - W exp(-I(x)) on a log grid
        grid = omega * np.logspace(-8, 0, 160)
        gvals = [x0 - _fixed_point_map(x0, spin, bath, nodes, weights) for x0 in grid]
        for i in range(len(grid) - 1):
            if gvals[i] == 0.0:
                candidates.add(float(grid[i]))
            elif gvals[i] * gvals[i + 1] < 0.0:
                lo, hi = grid[i], grid[i + 1]
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    gm = mid - _fixed_point_map(mid, spin, bath, nodes, weights)
                    if gvals[i] * gm <= 0.0:
                        hi = mid
                    else:
                        lo = mid
                candidates.add(0.5 * (lo + hi))

    best = min(candidates, key=lambda c: free_energy_bound(c, spin, bath))
    # polish the selected root
    if best > 0.0:
        for _ in range(200):
            nxt = _fixed_point_map(best, spin, bath, nodes, weights)
            if abs(nxt - best) < 1e-14 * max(omega, 1.0):
                break
            best = 0.5 * (best + nxt)
        residual = abs(best - _fixed_point_map(best, spin, bath, nodes, weights))
        converged = converged and residual < _FP_TOL * max(omega, 1.0)

    return VariationalSolution(
        omega_renorm=float(best),
        phi=_phi_factory(best, bath),
        e_r_renorm=e_r_renormalized(best, bath),
        free_energy_bound=free_energy_bound(best, spin, bath),
        iterations=iterations,
        converged=converged,
        omega_bare=omega,
        bath=bath)


def variational_prediction(solution: VariationalSolution,
                           state: SpinState) -> EquilibriumPrediction:
    """Asymptotic heat transfer in the variational frame."""
    if not solution.converged:
        raise NotConvergedError(
            "refusing prediction from an unconverged variational solution")
    wr = solution.omega_renorm
    beta = solution.bath.beta
    therm = 0.5 * wr * math.tanh(0.5 * beta * wr)
    spin = SpinParams(omega0=0.0, omega_tunnel=solution.omega_bare)
    h0 = state.energy(spin)
    return EquilibriumPrediction(
        mean_heat=solution.e_r_renorm + therm + h0,
        delta_u=-therm - h0,
        source="variational")
