"""Spectral density and correlation-integral tests, including the
independent high-resolution trapezoid oracle."""

import numpy as np
import pytest

from heatmpo.bathcorr import (BathParams, SpectralDensity, build_eta_table,
                              eta_continuous, spectral_value)


def make_bath(alpha=0.1, omega_c=5.0, temperature=5.0):
    return BathParams(temperature=temperature,
                      spectral=SpectralDensity(alpha=alpha, omega_c=omega_c))


class TestSpectralDensity:
    def test_zero_frequency(self):
        assert spectral_value(SpectralDensity(alpha=0.1, omega_c=5.0), 0.0) == 0.0

    def test_hand_values(self):
        # J(w) = 2 alpha w exp(-w/wc)
        assert spectral_value(SpectralDensity(0.1, 5.0), 1.0) == pytest.approx(
            0.2 * np.exp(-0.2), rel=1e-12)
        assert spectral_value(SpectralDensity(1.5, 5.0), 5.0) == pytest.approx(
            15.0 * np.exp(-1.0), rel=1e-12)

    def test_negative_frequency_rejected(self):
        with pytest.raises(ValueError):
            spectral_value(SpectralDensity(0.1, 5.0), -1.0)

    def test_reorganization_energy(self):
        sd = SpectralDensity(alpha=0.3, omega_c=7.0)
        assert sd.reorganization_energy == pytest.approx(2.1, rel=1e-14)
        # cross-check against direct quadrature of (1/2) int J/w
        w = np.linspace(1e-8, 60 * 7.0, 400_001)
        assert np.trapezoid(0.5 * spectral_value(sd, w) / w, w) == pytest.approx(
            2.1, rel=1e-6)

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            SpectralDensity(alpha=-0.1, omega_c=5.0)
        with pytest.raises(ValueError):
            SpectralDensity(alpha=0.1, omega_c=0.0)
        with pytest.raises(ValueError):
            BathParams(temperature=0.0, spectral=SpectralDensity(0.1, 5.0))


class TestEtaContinuous:
    def test_u_zero_kills_counting_kinds(self):
        bath = make_bath()
        assert eta_continuous("C", bath, 2.0, 0.0) == 0.0
        assert eta_continuous("A2", bath, 2.0, 0.0) == 0.0

    def test_t_zero(self):
        bath = make_bath()
        for kind in ("C", "A1", "A2"):
            assert eta_continuous(kind, bath, 0.0, 0.3) == 0.0

    def test_a1_against_trapezoid_oracle(self):
        # brute-force quadrature oracle: 1e6 grid points on (0, 60 wc)
        bath = make_bath(alpha=0.1, omega_c=5.0, temperature=5.0)
        t = 1.0
        w = np.linspace(0.0, 300.0, 1_000_001)
        ww = w[1:]
        coth = 1.0 / np.tanh(ww / (2.0 * bath.temperature))
        pref = 2.0 * bath.spectral.alpha * np.exp(-ww / 5.0) / ww
        one_m_cos = 2.0 * np.sin(0.5 * ww * t) ** 2
        vals = pref * (coth * one_m_cos + 1j * (np.sin(ww * t) - ww * t))
        integrand = np.empty(w.size, dtype=complex)
        integrand[1:] = vals
        integrand[0] = 2.0 * bath.spectral.alpha * bath.temperature * t * t
        oracle = np.trapezoid(integrand, w)
        got = eta_continuous("A1", bath, t, 0.0)
        assert abs(got - oracle) / abs(oracle) < 1e-8

    def test_parity_in_u(self):
        bath = make_bath(temperature=2.0)
        t, u = 1.3, 0.07
        for kind in ("A1", "A2"):
            assert eta_continuous(kind, bath, t, u) == pytest.approx(
                eta_continuous(kind, bath, t, -u), abs=1e-13)
        assert eta_continuous("C", bath, t, u) == pytest.approx(
            -eta_continuous("C", bath, t, -u), abs=1e-13)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            eta_continuous("A1", make_bath(), -1.0, 0.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            eta_continuous("B7", make_bath(), 1.0, 0.0)


class TestEtaTable:
    def test_conjugation_symmetry(self):
        table = build_eta_table(make_bath(), 0.05, 12, 0.07)
        for dk in range(13):
            assert table.coeff("+", "+", dk) == pytest.approx(
                np.conj(table.coeff("-", "-", dk)), abs=1e-14)

    def test_counting_field_parity_at_table_level(self):
        bath = make_bath(temperature=1.0)
        tp = build_eta_table(bath, 0.05, 8, 0.05)
        tm = build_eta_table(bath, 0.05, 8, -0.05)
        for dk in range(9):
            # A parts: eta_pp and the symmetric part of the cross terms
            assert tp.coeff("+", "+", dk) == pytest.approx(
                tm.coeff("+", "+", dk), abs=1e-13)
            a_sym_p = tp.coeff("-", "+", dk) + np.conj(tp.coeff("+", "-", dk))
            a_sym_m = tm.coeff("-", "+", dk) + np.conj(tm.coeff("+", "-", dk))
            assert a_sym_p == pytest.approx(a_sym_m, abs=1e-13)
            # C part: antisymmetric combination flips sign
            c_p = tp.coeff("-", "+", dk) - np.conj(tp.coeff("+", "-", dk))
            c_m = tm.coeff("-", "+", dk) - np.conj(tm.coeff("+", "-", dk))
            assert c_p == pytest.approx(-c_m, abs=1e-13)

    def test_u_zero_reduces_to_plain_kernel(self):
        # at u = 0 the assembled coefficients must come from the A1 kernel
        # alone: eta_pp = c_A1, eta_mp = -c_A1
        bath = make_bath()
        delta, depth = 0.05, 10
        table = build_eta_table(bath, delta, depth, 0.0)
        times = delta * np.arange(depth + 2)
        eta = np.array([eta_continuous("A1", bath, float(t), 0.0) for t in times])
        lags = np.empty(depth + 1, dtype=complex)
        lags[0] = eta[1]
        lags[1:] = eta[2:] - 2.0 * eta[1:-1] + eta[:-2]
        for dk in range(depth + 1):
            assert table.coeff("+", "+", dk) == pytest.approx(lags[dk], abs=1e-13)
            assert table.coeff("-", "+", dk) == pytest.approx(-lags[dk], abs=1e-13)

    def test_decoupled_bath_vanishes(self):
        bath = BathParams(temperature=5.0,
                          spectral=SpectralDensity(alpha=0.0, omega_c=5.0))
        table = build_eta_table(bath, 0.05, 5, 0.1)
        for coeffs in table.coeffs.values():
            assert np.max(np.abs(coeffs)) == 0.0

    def test_point_scheme_differs(self):
        bath = make_bath()
        cell = build_eta_table(bath, 0.05, 5, 0.0)
        point = build_eta_table(bath, 0.05, 5, 0.0, scheme="point")
        assert point.coeff("+", "+", 0) == 0.0  # eta(0) = 0 literally
        assert cell.coeff("+", "+", 0) != 0.0

    def test_tail_decay(self):
        # paper-scale memory window: coefficients fall by orders of
        # magnitude across the table; the kernel's algebraic (power-law)
        # tail keeps the lag-K entry around 1e-3 of the self-coefficient
        table = build_eta_table(make_bath(), 0.01, 500, 0.0)
        mags = np.abs(table.coeffs[("+", "+")])
        assert mags[500] < 5e-3 * mags[0]
        assert mags[500] < mags[100] < mags[10]
        assert table.tail_ratio < 5e-3

    def test_memory_warning(self):
        with pytest.warns(UserWarning):
            build_eta_table(make_bath(), 0.05, 4, 0.0, memory_time=5.0)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            build_eta_table(make_bath(), -0.1, 5, 0.0)
        with pytest.raises(ValueError):
            build_eta_table(make_bath(), 0.1, 0, 0.0)
        with pytest.raises(ValueError):
            build_eta_table(make_bath(), 0.1, 5, 0.0, scheme="midpoint")
