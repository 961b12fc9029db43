"""Assembly of influence-functional pair weights from a coefficient table.

A pair weight couples the path super-indices at two time slots separated by
`lag` steps:

    I_lag(sig_k, sig_k') = exp[- sum_{q,q'} s_k^q eta^{qq'}_lag s_k'^{q'}]

with s^+/s^- the forward/backward branch eigenvalues of S_z (+-1/2) encoded
in the super-index sig = (s+, s-).  Beyond the table depth the weight is the
all-ones matrix (finite bath memory).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bathcorr import EtaTable
from .spinsys import FreePropagator

# super-index sig = 2*i_plus + i_minus, i = 0 -> s = +1/2, i = 1 -> s = -1/2;
# this matches vec(rho) in row-major order.
S_VALUES = np.array([0.5, -0.5])
S_PLUS = np.repeat(S_VALUES, 2)    # s+ per super-index
S_MINUS = np.tile(S_VALUES, 2)     # s- per super-index


@dataclass(frozen=True)
class PairWeight:
    """4x4 weight table indexed by (sig_k, sig_k')."""

    lag: int
    table: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        """Self-weight vector I_0(sig) (meaningful for lag 0)."""
        return np.ascontiguousarray(np.diag(self.table))


def pair_weight(table: EtaTable, lag: int) -> PairWeight:
    """Exponentiate the branch quadratic form at the given lag."""
    if not 0 <= lag <= table.depth:
        raise ValueError(f"lag {lag} outside table depth {table.depth}")
    e_pp = table.coeff("+", "+", lag)
    e_pm = table.coeff("+", "-", lag)
    e_mp = table.coeff("-", "+", lag)
    e_mm = table.coeff("-", "-", lag)

    sp_k, sm_k = S_PLUS[:, None], S_MINUS[:, None]
    sp_j, sm_j = S_PLUS[None, :], S_MINUS[None, :]
    exponent = (sp_k * e_pp * sp_j + sp_k * e_pm * sm_j
                + sm_k * e_mp * sp_j + sm_k * e_mm * sm_j)
    return PairWeight(lag=lag, table=np.exp(-exponent))


def all_pair_weights(table: EtaTable) -> list[PairWeight]:
    """Weights for every lag 0 .. depth in order."""
    return [pair_weight(table, lag) for lag in range(table.depth + 1)]


@dataclass(frozen=True)
class StepPropagator:
    """One-step path-sum operator: the free pair propagator together with the
    influence weights coupling the newly created slot to every slot inside
    the memory window.  Both engines consume this object; it is built once
    per run and reused at every step."""

    lag_weights: tuple
    free: FreePropagator

    @property
    def depth(self) -> int:
        return len(self.lag_weights) - 1

    def lag_matrix(self, dk: int) -> np.ndarray:
        return self.lag_weights[dk].table

    @property
    def self_diagonal(self) -> np.ndarray:
        return self.lag_weights[0].diagonal

    @property
    def free_full(self) -> np.ndarray:
        return self.free.step_full

    @property
    def free_half(self) -> np.ndarray:
        return self.free.step_half


def build_step_propagator(table: EtaTable, free) -> StepPropagator:
    return StepPropagator(lag_weights=tuple(all_pair_weights(table)), free=free)
