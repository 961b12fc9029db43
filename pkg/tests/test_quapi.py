"""Dense window engine: exactness against the zero-tunnelling closed form
and structural invariants."""

import numpy as np
import pytest

from heatmpo.bathcorr import BathParams, SpectralDensity, build_eta_table
from heatmpo.errors import UnsupportedConfigError
from heatmpo.ibm import ibm_chi
from heatmpo.quapi import MAX_DENSE_DEPTH, dense_propagate
from heatmpo.spinsys import SpinParams, SpinState


def make_bath(alpha=0.1, temperature=5.0):
    return BathParams(temperature=temperature,
                      spectral=SpectralDensity(alpha=alpha, omega_c=5.0))


IBM_SPIN = SpinParams(omega0=1.0, omega_tunnel=0.0)
SB_SPIN = SpinParams(omega0=0.0, omega_tunnel=1.0)


def test_decoupled_bath_chi_is_one():
    table = build_eta_table(make_bath(alpha=0.0), 0.05, 4, 0.3)
    series, _ = dense_propagate(SpinState.right(), SB_SPIN, table, 8)
    assert np.max(np.abs(series.chi - 1.0)) < 1e-12


def test_u_zero_trace_preservation():
    table = build_eta_table(make_bath(), 0.05, 6, 0.0)
    series, states = dense_propagate(SpinState.up(), SB_SPIN, table, 40)
    assert np.max(np.abs(series.chi - 1.0)) < 1e-10
    assert all(abs(np.trace(s.rho) - 1.0) < 1e-10 for s in states)


def test_matches_closed_form_zero_tunnelling():
    # with no tunnelling the discretized path sum telescopes and must equal
    # the closed-form characteristic function at every grid point
    bath = make_bath()
    table = build_eta_table(bath, 0.05, 12, 0.01)
    series, _ = dense_propagate(SpinState.up(), IBM_SPIN, table, 12)
    for n in (1, 4, 8, 12):
        exact = ibm_chi(bath, float(series.times[n]), 0.01)
        assert series.chi[n] == pytest.approx(exact, abs=5e-11)


def test_mean_heat_within_one_percent_zero_tunnelling():
    # desk-scale stand-in for the infeasible K = 40 window: within the
    # growth phase the discretization is exact, so only the finite
    # counting field and quadrature contribute
    bath = make_bath()
    u = 0.01
    table = build_eta_table(bath, 0.05, 12, u)
    series, _ = dense_propagate(SpinState.up(), IBM_SPIN, table, 12)
    t = float(series.times[-1])
    mean = series.chi[-1].imag / u
    exact = bath.spectral.alpha * 125.0 * t * t / (1.0 + 25.0 * t * t)
    assert abs(mean - exact) / exact < 0.01


def test_hermiticity_under_counting_field_flip():
    bath = make_bath(alpha=0.3, temperature=1.0)
    tp = build_eta_table(bath, 0.05, 5, 0.1)
    tm = build_eta_table(bath, 0.05, 5, -0.1)
    sp, _ = dense_propagate(SpinState.right(), SB_SPIN, tp, 10)
    sm, _ = dense_propagate(SpinState.right(), SB_SPIN, tm, 10)
    assert np.max(np.abs(sm.chi - np.conj(sp.chi))) < 1e-10


def test_state_independence_zero_tunnelling():
    # the characteristic function must not depend on the spin populations
    bath = make_bath()
    table = build_eta_table(bath, 0.05, 8, 0.02)
    s_up, _ = dense_propagate(SpinState.up(), IBM_SPIN, table, 8)
    s_dn, _ = dense_propagate(SpinState.down(), IBM_SPIN, table, 8)
    assert np.max(np.abs(s_up.chi - s_dn.chi)) < 1e-12


def test_depth_guard():
    table = build_eta_table(make_bath(), 0.05, MAX_DENSE_DEPTH + 1, 0.0)
    with pytest.raises(UnsupportedConfigError):
        dense_propagate(SpinState.up(), SB_SPIN, table, 4)


def test_window_slides_beyond_depth():
    table = build_eta_table(make_bath(), 0.05, 3, 0.0)
    series, states = dense_propagate(SpinState.up(), SB_SPIN, table, 12)
    assert np.max(np.abs(series.chi - 1.0)) < 1e-10
    assert len(states) == 13
