"""Dense path-sum reference engine.

Stores the augmented density tensor explicitly (one extent-4 axis per time
slot inside the memory window, newest axis first) and iterates the step
operator literally.  Exponential in the memory depth, so it is guarded to
K <= 12 and exists to pin down the compressed engine: both must agree
element-wise when truncation is disabled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bathcorr import EtaTable
from .errors import UnsupportedConfigError
from .influence import StepPropagator, build_step_propagator
from .spinsys import SpinParams, SpinState, free_propagator, modified_initial
from .tempo import TRACE_VECTOR, CharSeries

__all__ = ["AugmentedDensityTensor", "StepPropagator", "dense_propagate",
           "MAX_DENSE_DEPTH"]

MAX_DENSE_DEPTH = 12


@dataclass
class AugmentedDensityTensor:
    """Dense window of the path sum: axis 0 is the newest slot."""

    window: np.ndarray
    step_index: int

    @property
    def n_slots(self) -> int:
        return self.window.ndim

    def newest_vector(self) -> np.ndarray:
        """Older slots summed with ones; the newest left open."""
        out = self.window
        while out.ndim > 1:
            out = out.sum(axis=-1)
        return out

    def chi(self) -> complex:
        """Trace on the newest slot after summing the older ones."""
        return complex(TRACE_VECTOR @ self.newest_vector())


def _apply_step(adt: AugmentedDensityTensor, step: StepPropagator,
                depth: int) -> AugmentedDensityTensor:
    window = adt.window
    if window.ndim > depth:
        window = window.sum(axis=-1)
    n_old = window.ndim
    head = step.free_full * step.lag_matrix(1)
    self_diag = step.self_diagonal
    new = np.empty((4,) + window.shape, dtype=complex)
    for sig in range(4):
        block = window * head[sig].reshape((4,) + (1,) * (n_old - 1))
        for ax in range(1, n_old):
            lag = ax + 1
            shape = (1,) * ax + (4,) + (1,) * (n_old - 1 - ax)
            block = block * step.lag_matrix(lag)[sig].reshape(shape)
        new[sig] = self_diag[sig] * block
    return AugmentedDensityTensor(window=new, step_index=adt.step_index + 1)


def dense_propagate(state: SpinState, params: SpinParams, table: EtaTable,
                    n_steps: int):
    """Iterate the dense step operator for the given coefficient table.

    Returns (CharSeries, states) with states a list of SpinState when the
    table was built at u = 0 and None otherwise.  The emitted grid is
    t_n = n * delta including t = 0.
    """
    if table.depth > MAX_DENSE_DEPTH:
        raise UnsupportedConfigError(
            f"dense engine limited to K <= {MAX_DENSE_DEPTH} "
            f"(4^(K+1) window entries); got K = {table.depth}")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")

    free = free_propagator(params, table.delta)
    step = build_step_propagator(table, free)
    want_states = table.u == 0.0

    chi = np.empty(n_steps + 1, dtype=complex)
    chi[0] = 1.0
    states: list[SpinState] | None = [state] if want_states else None

    rho0p = modified_initial(state, params, table.delta)
    adt = AugmentedDensityTensor(
        window=step.self_diagonal * rho0p.rho.reshape(4), step_index=1)

    def emit(n: int):
        chi[n] = adt.chi()
        if want_states:
            rho = (free.step_half @ adt.newest_vector()).reshape(2, 2)
            states.append(SpinState(rho, tol=1e-8))

    emit(1)
    for n in range(2, n_steps + 1):
        adt = _apply_step(adt, step, table.depth)
        emit(n)

    times = table.delta * np.arange(n_steps + 1)
    series = CharSeries(times=times, chi=chi, u=table.u,
                        bond_max=np.zeros(n_steps + 1, dtype=int),
                        discarded_cum=np.zeros(n_steps + 1))
    return series, states
