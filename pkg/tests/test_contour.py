"""Cycle integrals, branch-tracked paths, and the small-energy fits."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tunnelsaddle import (
    BranchAmbiguity,
    CutCollision,
    DomainError,
    Potential,
    a_i_closed_form,
    cycle_integral,
    cycle_integrals,
    cycle_time_integral,
    extract_log_coefficient,
    real_line_S,
    tracked_sqrt,
)
from _reference import A_I_ORIGIN, A_S_FAR, A_S_ORIGIN, B_S_ORIGIN
from conftest import RAY_MODULI

PHASES = (1.0, 1.0j, np.exp(0.25j * np.pi))


class TestTrackedSqrt:
    def test_sign_flips_around_one_root(self):
        hosc = Potential.harmonic()
        eps = 1e-2
        r = np.sqrt(2 * eps)
        th = np.linspace(0.0, 2 * np.pi, 401)
        path = tracked_sqrt(hosc, r + 0.3 * r * np.exp(1j * th), eps)
        path.validate(hosc)
        assert path.velocity[-1] / path.velocity[0] == pytest.approx(-1.0)

    def test_no_flip_around_both_roots(self):
        hosc = Potential.harmonic()
        eps = 1e-2
        th = np.linspace(0.0, 2 * np.pi, 401)
        path = tracked_sqrt(hosc, 3 * np.sqrt(2 * eps) * np.exp(1j * th),
                            eps)
        path.validate(hosc)
        assert path.velocity[-1] / path.velocity[0] == pytest.approx(1.0)

    def test_anchor_selects_sheet(self):
        hosc = Potential.harmonic()
        pts = np.array([2.0, 2.0 + 0.1j])
        plus = tracked_sqrt(hosc, pts, 1e-3)
        minus = tracked_sqrt(hosc, pts, 1e-3,
                             anchor=-plus.velocity[0])
        assert minus.velocity[0] == pytest.approx(-plus.velocity[0])
        with pytest.raises(DomainError):
            tracked_sqrt(hosc, pts, 1e-3, anchor=1.234)

    def test_coarse_sampling_is_refused(self):
        # velocities at these two points are orthogonal (1 vs i), so
        # both sheet choices are equidistant and the tracker must not
        # guess
        hosc = Potential.harmonic()
        pts = np.array([1.0j, 1.0])
        with pytest.raises(BranchAmbiguity):
            tracked_sqrt(hosc, pts, 0.0)


class TestCycleIntegral:
    @given(st.floats(1e-6, 1e-2), st.floats(0, 2 * np.pi))
    @settings(max_examples=30, deadline=None)
    def test_harmonic_is_linear(self, mod, phase):
        eps = mod * np.exp(1j * phase)
        val = cycle_integral(Potential.harmonic(), eps)
        assert abs(val - 2 * np.pi * eps) < 1e-12 * abs(eps)

    def test_quartic_leading_correction(self, quartic):
        for mod, budget in ((1e-6, 1e-8), (1e-4, 1e-8), (1e-3, 1e-6)):
            for ph in PHASES:
                eps = mod * ph
                ref = 2 * np.pi * eps * (1 + 3 * eps / 8)
                rel = abs(cycle_integral(quartic, eps) - ref) / abs(ref)
                assert rel < budget

    def test_time_integral_is_energy_derivative(self, quartic):
        eps = 1e-3j
        h = 1e-6 * abs(eps)
        u = eps / abs(eps)
        dI = (cycle_integral(quartic, eps + h * u)
              - cycle_integral(quartic, eps - h * u)) / (2 * h * u)
        assert abs(dI - cycle_time_integral(quartic, eps)) < 1e-5

    def test_period_tends_to_harmonic(self, quartic):
        t = cycle_time_integral(quartic, 1e-8j)
        assert t == pytest.approx(2 * np.pi, abs=1e-6)

    def test_crowded_cut_is_rejected(self, quartic):
        with pytest.raises(CutCollision):
            cycle_integrals(quartic, 0.5)

    def test_closed_form_coefficient(self, quartic):
        assert a_i_closed_form(4) == pytest.approx(3.0 / 8.0, rel=1e-12)
        # n = 6 cross-check against a fresh numeric fit
        p6 = Potential.well(6)
        eps = 1j * np.geomspace(1e-5, 1e-3, 8)
        fit = extract_log_coefficient(p6, 0.0, 1.5 * p6.barrier_exit(), eps)
        assert abs(fit.A_I) == pytest.approx(a_i_closed_form(6), rel=1e-6)
        with pytest.raises(DomainError):
            a_i_closed_form(5)


class TestRealLineIntegrals:
    def test_zero_energy_value(self, quartic):
        s0 = real_line_S(quartic, 0.0, 2.0, 0.0)
        assert s0.real == pytest.approx(2.0 / 3.0, abs=1e-10)
        assert s0.imag == pytest.approx(2.0 / 3.0, abs=1e-10)

    def test_small_energy_continuity(self, quartic):
        s0 = real_line_S(quartic, 0.0, 2.0, 0.0)
        s1 = real_line_S(quartic, 0.0, 2.0, 1e-9j)
        assert abs(s1 - s0) < 1e-6


class TestSeriesFit:
    def test_needs_a_clean_ray(self, quartic):
        with pytest.raises(DomainError):
            extract_log_coefficient(quartic, 0.0, 2.0,
                                    1j * RAY_MODULI[:4])
        mixed = np.array([1e-4j, 2e-4j, 4e-4j, 8e-4 * np.exp(0.3j),
                          1.6e-3j, 3e-3j])
        with pytest.raises(DomainError):
            extract_log_coefficient(quartic, 0.0, 2.0, mixed)

    def test_origin_coefficients(self, series_origin):
        assert series_origin.A_S == pytest.approx(A_S_ORIGIN, abs=1e-9)
        assert series_origin.A_S == pytest.approx(0.5, abs=0.02)
        assert abs(series_origin.A_S_imag) < 5e-3
        assert series_origin.B_S == pytest.approx(B_S_ORIGIN, abs=1e-9)
        assert abs(series_origin.A_I) == pytest.approx(A_I_ORIGIN, rel=1e-9)
        assert abs(series_origin.A_I - 3.0 / 8.0) < 1e-4
        assert series_origin.S0.real == pytest.approx(2 / 3, abs=1e-10)
        assert series_origin.S0.imag == pytest.approx(2 / 3, abs=1e-10)

    def test_log_term_dies_away_from_origin(self, series_far):
        assert series_far.A_S == pytest.approx(A_S_FAR, abs=1e-9)
        assert abs(series_far.A_S) < 0.05

    def test_odd_family_reports_alternate_exponent(self):
        p5 = Potential.well(5)
        eps = 1j * np.geomspace(1e-5, 1e-3, 8)
        fit = extract_log_coefficient(p5, 0.0, 1.5 * p5.barrier_exit(), eps)
        alt = fit.alt_exponent_residuals
        assert alt is not None
        assert alt["exponent_lead"] == pytest.approx(1.5)
        assert alt["exponent_alt"] == pytest.approx(3.0)
        # the odd anharmonicity averages out at first order, so the
        # half-integer candidate carries no weight and the series
        # really starts at eps^(n-2)
        assert abs(fit.A_I) < 1e-8
        ratio = cycle_integral(p5, 1e-3j) / (2e-3j * np.pi) - 1.0
        assert 0.7 < abs(ratio) / 1e-9 < 0.9
