"""Boundary-value solver: time map, count law, converged energies."""

import json

import numpy as np
import pytest

from tunnelsaddle import (
    DomainError,
    NoConvergence,
    Potential,
    cycle_integrals,
    epsilon_to_time,
    multi_instanton_epsilon,
    n_of_epsilon,
    real_line_T,
    solve_saddle,
)
from _reference import (
    CANONICAL_EPSILON,
    MULTI_EPSILON_1,
    MULTI_IM_RATIO_1,
    MULTI_IM_RATIO_2,
    TGRID_EPSILON,
)
from conftest import TAU


class TestValidation:
    def test_harmonic_has_no_saddle(self):
        with pytest.raises(NoConvergence):
            solve_saddle(Potential.harmonic(), 0.0, 2.0, 100 * TAU)

    def test_short_time_rejected(self, quartic):
        with pytest.raises(DomainError, match="several cycles"):
            solve_saddle(quartic, 0.0, 2.0, 11.0)

    def test_endpoint_inside_barrier_rejected(self, quartic):
        with pytest.raises(DomainError):
            solve_saddle(quartic, 0.0, 1.2, 100 * TAU)

    def test_time_map_needs_a_cycle(self, quartic):
        with pytest.raises(DomainError, match="at least one cycle"):
            epsilon_to_time(quartic, 0.0, 2.0, 1e-3j, 0)

    def test_multi_instanton_order_validated(self, quartic):
        with pytest.raises(DomainError):
            multi_instanton_epsilon(quartic, -1, 1e-3j)
        with pytest.raises(DomainError):
            multi_instanton_epsilon(quartic, 1.5, 1e-3j)


class TestTimeMap:
    def test_one_more_cycle_adds_one_period(self, quartic):
        eps = CANONICAL_EPSILON
        cyc = cycle_integrals(quartic, eps)
        d = (epsilon_to_time(quartic, 0.0, 2.0, eps, 5)
             - epsilon_to_time(quartic, 0.0, 2.0, eps, 4))
        assert abs(d - cyc.T) < 1e-12

    def test_single_cycle_splits_into_period_plus_line(self, quartic):
        eps = CANONICAL_EPSILON
        cyc = cycle_integrals(quartic, eps)
        line = real_line_T(quartic, 0.0, 2.0, eps)
        tot = epsilon_to_time(quartic, 0.0, 2.0, eps, 1)
        assert abs(tot - cyc.T - line) < 1e-12

    def test_converged_energy_lands_on_target(self, quartic,
                                              canonical_saddle):
        t = epsilon_to_time(quartic, 0.0, 2.0, canonical_saddle.epsilon,
                            canonical_saddle.N)
        assert abs(t.imag) < 1e-8
        assert t.real == pytest.approx(733 * TAU, abs=1e-8)


class TestCanonicalSaddle:
    def test_frozen_energy(self, canonical_saddle):
        assert canonical_saddle.epsilon == pytest.approx(
            CANONICAL_EPSILON, rel=1e-9)

    def test_bookkeeping(self, canonical_saddle):
        s = canonical_saddle
        assert s.N == 733
        assert s.iterations <= 5
        assert abs(s.residual) < 1e-8
        assert s.mismatch < 1e-7

    def test_branch_classification(self, canonical_saddle):
        s = canonical_saddle
        assert s.kept and not s.conjugate_kept
        assert s.conjugate_epsilon == s.epsilon.conjugate()
        assert s.epsilon.imag > 0

    def test_dynamical_winding_matches_held_count(self, canonical_saddle):
        s = canonical_saddle
        assert round(s.winding) == s.N
        assert s.N - 0.5 < s.winding < s.N

    def test_newton_history_contracts(self, canonical_saddle):
        h = canonical_saddle.history
        assert len(h) >= 2
        assert h[-1][1] < h[0][1]

    def test_verification_runs_full_span(self, canonical_saddle):
        v = canonical_saddle.verification
        assert v is not None and not v.escaped
        assert v.t_end == pytest.approx(733 * TAU, abs=1e-9)
        assert abs(v.z[-1] - 2.0) < 1e-7

    def test_as_dict_serializes(self, canonical_saddle):
        d = canonical_saddle.as_dict()
        blob = json.loads(json.dumps(d))
        assert blob["N"] == 733
        assert blob["epsilon"][1] == pytest.approx(
            CANONICAL_EPSILON.imag, rel=1e-9)
        assert blob["kept"] is True
        assert len(blob["residual_history"]) == d["iterations"] + 1


class TestTimeGridFamily:
    def test_frozen_energies(self, tgrid_saddles):
        for nt, sol in tgrid_saddles.items():
            assert sol.epsilon == pytest.approx(TGRID_EPSILON[nt],
                                                rel=1e-9), nt
            assert sol.N == nt

    def test_energy_shrinks_with_time(self, tgrid_saddles):
        mods = [abs(tgrid_saddles[nt].epsilon)
                for nt in sorted(tgrid_saddles)]
        assert all(np.diff(mods) < 0)
        ims = [tgrid_saddles[nt].epsilon.imag
               for nt in sorted(tgrid_saddles)]
        assert all(i > 0 for i in ims)
        assert all(np.diff(ims) < 0)

    def test_windings_track_counts(self, tgrid_saddles):
        for sol in tgrid_saddles.values():
            assert round(sol.winding) == sol.N
            assert 0.0 < sol.N - sol.winding < 0.3


class TestCountLaw:
    def test_leading_law_sets_the_seed_count(self, quartic):
        # the solver holds N at the rounded count of the seed energy
        n_est = n_of_epsilon(quartic, 1e-3j)
        assert 725 <= n_est <= 740
        assert round(n_est) == 733

    def test_series_refinement_tightens(self, quartic, canonical_saddle,
                                        series_origin):
        # at the converged energy the leading law undershoots badly;
        # the constant terms of the refined balance recover the count
        n_ref = n_of_epsilon(quartic, canonical_saddle.epsilon,
                             series=series_origin)
        assert n_ref == pytest.approx(733, rel=0.01)
        n_lead = n_of_epsilon(quartic, canonical_saddle.epsilon)
        assert abs(n_ref - 733) < abs(n_lead - 733)


class TestNewtonFailure:
    def test_iteration_cap_carries_best_iterate(self, quartic):
        with pytest.raises(NoConvergence) as exc:
            solve_saddle(quartic, 0.0, 2.0, 150 * TAU, max_iter=2)
        err = exc.value
        assert isinstance(err.best, complex)
        assert err.residual is not None
        assert len(err.history) == 2
        # the best iterate already sits in the right decade
        assert 1e-4 < abs(err.best) < 0.05


class TestMultiInstanton:
    def test_zeroth_order_is_identity(self, quartic):
        assert multi_instanton_epsilon(quartic, 0, CANONICAL_EPSILON) \
            == CANONICAL_EPSILON

    def test_frozen_first_order(self, quartic):
        e1 = multi_instanton_epsilon(quartic, 1, CANONICAL_EPSILON)
        assert e1 == pytest.approx(MULTI_EPSILON_1, rel=1e-9)

    def test_energy_ratios_land_in_odd_integer_bands(self, quartic):
        e0 = CANONICAL_EPSILON
        e1 = multi_instanton_epsilon(quartic, 1, e0)
        e2 = multi_instanton_epsilon(quartic, 2, e0)
        r1 = e1.imag / e0.imag
        r2 = e2.imag / e0.imag
        assert r1 == pytest.approx(MULTI_IM_RATIO_1, rel=1e-6)
        assert r2 == pytest.approx(MULTI_IM_RATIO_2, rel=1e-6)
        assert 2.4 < r1 < 3.6
        assert 3.4 < r2 < 4.6

    def test_ray_phase_is_preserved(self, quartic):
        e1 = multi_instanton_epsilon(quartic, 1, CANONICAL_EPSILON)
        assert np.angle(e1) == pytest.approx(np.angle(CANONICAL_EPSILON),
                                             abs=1e-12)
