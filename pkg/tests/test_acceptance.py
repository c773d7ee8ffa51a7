"""End-to-end acceptance checks, one per shipped guarantee.

Each test exercises the public API the way the README advertises it and
pins the physics guarantees of the package: cycle integrals against
their small-energy series, agreement between independent action routes,
the extrapolated tunneling action, the cycle-count law, orbit clocks and
drift amplitudes, conjugate-pair selection, the decay-rate exponent from
the grid oracle, and the closed-form elliptic reference orbit.
"""

import numpy as np

from tunnelsaddle.contour import cycle_integral, extract_log_coefficient
from tunnelsaddle.elliptic import JacobiReference
from tunnelsaddle.oracle import fit_gamma
from tunnelsaddle.potential import Potential
from tunnelsaddle.trajectory import (
    cycle_amplitudes,
    cycle_durations,
    drift_coefficient,
    integrate_eom,
)

TAU = 2.0 * np.pi


def test_criterion_01_cycle_integral_small_epsilon_series(quartic):
    for mod in (1e-6, 1e-4, 1e-3):
        for phase in (1.0, 1.0j, np.exp(0.25j * np.pi)):
            eps = mod * phase
            got = cycle_integral(quartic, eps)
            ref = TAU * eps * (1.0 + 3.0 * eps / 8.0)
            rel = abs(got - ref) / abs(ref)
            tol = 1e-4 if mod == 1e-3 else 1e-6
            assert rel < tol, (eps, rel)


def test_criterion_02_cycle_integral_harmonic_exact():
    pot = Potential.harmonic()
    for eps in (1e-3j, 7e-4 * np.exp(0.3j), 2e-3, 1e-5 * np.exp(2.0j)):
        got = cycle_integral(pot, eps)
        assert abs(got - TAU * eps) < 1e-10 * abs(TAU * eps)


def test_criterion_03_log_coefficient_on_and_off_axis(series_origin, series_far):
    assert abs(series_origin.A_S - 0.5) < 0.02
    assert abs(series_far.A_S) < 0.05


def test_criterion_04_action_routes_agree(canonical_breakdown):
    br = canonical_breakdown
    assert abs(br.S_direct - br.S_contour) < 1e-6 * abs(br.S_direct)
    assert br.shortcut_agreement < 1e-5


def test_criterion_05_extrapolated_action_limit(tgrid_saddles, tgrid_breakdowns):
    nts = sorted(tgrid_saddles)
    eps = np.array([tgrid_saddles[nt].epsilon for nt in nts])
    S = np.array([tgrid_breakdowns[nt].S_contour for nt in nts])
    # subtracted correction: eps^(n/2) ln|eps| / Im eps^(n/2-1), n = 4
    g = eps ** 2 * np.log(np.abs(eps)) / eps.imag
    cols = np.stack([np.ones_like(eps), g, eps], axis=1)
    coef, *_ = np.linalg.lstsq(cols, S, rcond=None)
    S_inf, c = coef[0], coef[1]
    # components of i S: -Re(iS) = Im S, Im(iS) = Re S
    assert abs(S_inf.imag - 2.0 / 3.0) < 1e-3
    assert abs(S_inf.real - 2.0 / 3.0) < 1e-3
    # residual term magnitude within a factor two of 1/2 - 1/n = 1/4
    assert 0.5 < abs(c) / 0.25 < 2.0
    # and the raw deviation from the limit shrinks along the sweep
    dev = np.abs(S - S_inf)
    assert np.all(np.diff(dev) < 0.0)


def test_criterion_06_cycle_count_law(series_origin, tgrid_saddles):
    A_S = series_origin.A_S
    B_S = series_origin.B_S
    A_I = abs(series_origin.A_I)
    for nt in (200, 350, 500, 1000):
        sad = tgrid_saddles[nt]
        e = sad.epsilon
        n_law = (A_S * (-np.log(abs(e)) - 1.0) - B_S.imag) / (
            4.0 * np.pi * A_I * e.imag
        )
        assert abs(n_law - sad.N) / sad.N < 0.10, (nt, n_law)


def test_criterion_07_real_energy_cycle_clock(quartic):
    orbit = integrate_eom(quartic, 0.0, 1e-3)
    durs = cycle_durations(orbit)
    ref = TAU + 1.5 * np.pi * 1e-3
    assert abs(float(np.mean(durs)) - ref) < 1e-4
    amps = cycle_amplitudes(orbit)
    assert np.max(np.abs(np.diff(amps))) < 1e-8


def test_criterion_08_conjugate_selection_rule(
    canonical_saddle, far_saddle, tgrid_saddles, canonical_breakdown
):
    saddles = [canonical_saddle, far_saddle, *tgrid_saddles.values()]
    for sad in saddles:
        assert sad.kept != sad.conjugate_kept
        kept_eps = sad.epsilon if sad.kept else sad.conjugate_epsilon
        assert kept_eps.imag > 0.0
    # the kept member is the decaying one: Re(i S) < 0
    assert (1j * canonical_breakdown.S_contour).real < 0.0


def test_criterion_09_secular_drift_amplitude(quartic):
    for mod in np.geomspace(1e-4, 1e-2, 5):
        a = drift_coefficient(integrate_eom(quartic, 0.0, mod))
        pred = 3.0 / (2.0 * np.sqrt(2.0)) * mod ** 1.5
        assert 0.9 < abs(a) / pred < 1.1, mod
    pot5 = Potential.well(5)
    mods = np.geomspace(1e-3, 1e-2, 5)
    amps = [abs(drift_coefficient(integrate_eom(pot5, 0.0, m))) for m in mods]
    expo = np.polyfit(np.log(mods), np.log(amps), 1)[0]
    assert abs(expo - 3.5) < 0.3


def test_criterion_10_decay_rate_exponent_and_probes(oracle_sweep, hbar12_run):
    assert abs(oracle_sweep.slope - (-4.0 / 3.0)) < 0.10 * (4.0 / 3.0)
    g1 = fit_gamma(hbar12_run, 2.0).gamma
    g2 = fit_gamma(hbar12_run, 2.35).gamma
    assert abs(g1 - g2) / g1 < 0.05


def test_criterion_11_elliptic_reference_match(quartic):
    jac = JacobiReference(-0.06 + 0.06172j)
    eps, spread = jac.energy()
    traj = integrate_eom(quartic, 0.0, eps, v0=jac.v0, dual_frame=True)
    m = traj.t <= 50.0
    err = np.max(np.abs(traj.z[m] - jac.z(traj.t[m])))
    assert err < 1e-7
    # measured energy vs the two closed-form candidates: reported only
    print(f"measured eps(q) = {eps} (spread {spread:.3e})")
    for name, val in jac.candidate_energy_formulas().items():
        print(f"  candidate {name} = {val}  |diff| = {abs(val - eps):.3e}")
