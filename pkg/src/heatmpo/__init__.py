"""Numerically exact counting statistics of heat exchange between a
two-level system and a bosonic bath.

The package couples a compressed path-sum engine (`tempo`) and its dense
reference (`quapi`) to analytic and variational cross-checks: the
zero-tunnelling closed form (`ibm`), weak-coupling Markovian dynamics
(`spinsys`), and equilibrium heat predictors (`varpol`).
"""

__version__ = "0.1.0"

from .bathcorr import (BathParams, EtaTable, SpectralDensity, build_eta_table,
                       eta_continuous, spectral_value)
from .errors import (AccuracyError, HeatmpoError, NotConvergedError,
                     NumericalBlowupError, UnsupportedConfigError)
from .heatstats import (HeatCumulants, ThermoLedger, cumulants_from_chi,
                        default_u_eps, fdr_ratio, thermo_ledger)
from .ibm import (IbmCumulantRequest, ibm_chi, ibm_cumulant,
                  ibm_cumulant_asymptotic, ibm_log_chi, ibm_mean_heat)
from .influence import PairWeight, StepPropagator, build_step_propagator, pair_weight
from .quapi import AugmentedDensityTensor, dense_propagate
from .spinsys import (FreePropagator, MarkovRates, SpinParams, SpinState,
                      free_propagator, markov_rates, markov_reference,
                      modified_initial)
from .tempo import CharSeries, RunConfig, tempo_propagate
from .tensornet import (NO_TRUNCATION, TensorTrain, TruncationPolicy,
                        svd_truncate, tt_apply_step_mpo, truncation_sweep)
from .varpol import (EquilibriumPrediction, VariationalSolution,
                     additive_prediction, solve_silbey_harris,
                     variational_prediction)

__all__ = [name for name in dir() if not name.startswith("_")]
