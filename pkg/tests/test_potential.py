"""Potential family landmarks, WKB segments, and bounce identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tunnelsaddle import (
    DomainError,
    Potential,
    bounce_action_identity,
    bounce_time,
    euclidean_segment,
    wkb_actions,
)
from tunnelsaddle.potential import poly_eval


class TestConstruction:
    def test_well_family(self):
        pot = Potential.well(4)
        assert pot.coeffs == (0.0, 0.0, 0.5, 0.0, -0.25)
        assert pot.n == 4
        assert pot.family_exponent == 4

    def test_well_rejects_small_exponent(self):
        with pytest.raises(DomainError):
            Potential.well(2)

    def test_normalization_enforced(self):
        with pytest.raises(DomainError):
            Potential((0.1, 0.0, 0.5))
        with pytest.raises(DomainError):
            Potential((0.0, 0.3, 0.5))
        with pytest.raises(DomainError):
            Potential((0.0, 0.0, 1.0))
        with pytest.raises(DomainError):
            Potential((0.0, 0.5))

    def test_harmonic_flags(self):
        hosc = Potential.harmonic()
        assert hosc.is_harmonic
        assert hosc.family_exponent is None
        assert not Potential.well(4).is_harmonic

    def test_custom_polynomial_is_not_family(self):
        pot = Potential((0.0, 0.0, 0.5, 0.0, -0.3))
        assert pot.family_exponent is None
        assert pot.n == 4


class TestLandmarks:
    @pytest.mark.parametrize("n,exit_", [
        (3, 1.5),
        (4, np.sqrt(2.0)),
        (5, 2.5 ** (1.0 / 3.0)),
        (6, 3.0 ** 0.25),
    ])
    def test_barrier_exit(self, n, exit_):
        pot = Potential.well(n)
        assert pot.barrier_exit() == pytest.approx(exit_, rel=1e-12)
        assert abs(pot.V(pot.barrier_exit())) < 1e-14

    @pytest.mark.parametrize("n", [3, 4, 5, 6])
    def test_barrier_top(self, n):
        pot = Potential.well(n)
        assert pot.barrier_top() == pytest.approx(1.0, rel=1e-12)
        assert pot.barrier_height() == pytest.approx(0.5 - 1.0 / n,
                                                     rel=1e-12)
        assert abs(pot.dV(pot.barrier_top())) < 1e-14

    def test_harmonic_has_no_barrier(self):
        with pytest.raises(DomainError):
            Potential.harmonic().barrier_top()

    def test_curvatures(self):
        pot = Potential.well(4)
        assert pot.d2V(0.0) == pytest.approx(1.0)
        # max of V: curvature 1 - (n-1) x^{n-2} = -2 at x=1
        assert pot.d2V(1.0) == pytest.approx(-2.0)


class TestEvaluation:
    @given(st.lists(st.floats(-2, 2), min_size=1, max_size=7),
           st.complex_numbers(max_magnitude=3.0, allow_nan=False,
                              allow_infinity=False))
    @settings(max_examples=50, deadline=None)
    def test_poly_eval_matches_numpy(self, coeffs, z):
        mine = poly_eval(coeffs, z)
        ref = np.polyval(coeffs[::-1], z)
        assert abs(mine - ref) <= 1e-9 * max(1.0, abs(ref))

    def test_derivative_consistency(self):
        pot = Potential.well(5)
        h = 1e-6
        for z in (0.3, 1.2 + 0.4j, -0.7 + 0.1j):
            fd = (pot.V(z + h) - pot.V(z - h)) / (2 * h)
            assert abs(pot.dV(z) - fd) < 1e-8

    def test_w_is_twice_energy_minus_v(self):
        pot = Potential.well(4)
        z, eps = 0.4 + 0.2j, 1e-3j
        assert pot.w(z, eps) == pytest.approx(2 * eps - 2 * pot.V(z))

    def test_w_coeffs_roundtrip(self):
        pot = Potential.well(4)
        eps = 2e-3 + 1e-3j
        c = pot.w_coeffs(eps)
        z = 0.3 - 0.8j
        assert poly_eval(c, z) == pytest.approx(pot.w(z, eps))


class TestWkb:
    def test_quartic_segments_are_two_thirds(self):
        pot = Potential.well(4)
        wb = wkb_actions(pot, 0.0, 2.0)
        assert wb.S_E == pytest.approx(2.0 / 3.0, abs=1e-10)
        assert wb.S_free == pytest.approx(2.0 / 3.0, abs=1e-10)
        assert wb.b == pytest.approx(np.sqrt(2.0))

    def test_endpoint_at_exit_leaves_no_free_piece(self):
        pot = Potential.well(4)
        wb = wkb_actions(pot, 0.0, pot.barrier_exit())
        assert wb.S_free == 0.0

    def test_domain_validation(self):
        pot = Potential.well(4)
        with pytest.raises(DomainError):
            wkb_actions(pot, 1.5, 2.0)  # x beyond the exit
        with pytest.raises(DomainError):
            wkb_actions(pot, -0.1, 2.0)
        with pytest.raises(DomainError):
            wkb_actions(pot, 0.0, 1.0)  # y inside the barrier

    def test_segment_additivity(self):
        pot = Potential.well(4)
        b = pot.barrier_exit()
        whole = euclidean_segment(pot, 0.0, b)
        split = (euclidean_segment(pot, 0.0, 0.5)
                 + euclidean_segment(pot, 0.5, b))
        assert whole == pytest.approx(split, abs=1e-10)


class TestBounce:
    def test_roll_time_limits(self):
        pot = Potential.well(4)
        b = pot.barrier_exit()
        assert bounce_time(pot, b) == 0.0
        taus = [bounce_time(pot, r) for r in (0.2, 0.5, 1.0)]
        assert taus[0] > taus[1] > taus[2] > 0.0
        with pytest.raises(DomainError):
            bounce_time(pot, 0.0)
        with pytest.raises(DomainError):
            bounce_time(pot, b + 0.1)

    def test_action_identity(self):
        pot = Potential.well(4)
        s_tau, s_dir = bounce_action_identity(pot, 0.1)
        assert s_tau == pytest.approx(s_dir, rel=1e-4)
        assert s_dir == pytest.approx(
            euclidean_segment(pot, 0.1, pot.barrier_exit()))
