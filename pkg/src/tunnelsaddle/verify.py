"""Named self-check suites runnable from the command line.

Each suite exercises a handful of identities the library must satisfy
at desk scale: closed-form cycle integrals, energy conservation along
integrated paths, agreement between independent action routes, and the
internal consistency of the quantum-evolution rate extraction. Checks
return their measured numbers so a failing report is diagnosable on
its own.
"""

import numpy as np

from . import oracle as _oracle
from .action import action_decomposed
from .contour import cycle_integral
from .errors import TunnelError
from .potential import Potential, wkb_actions
from .saddle import solve_saddle
from .trajectory import IntegratorConfig, cycle_durations, \
    harmonic_reference, integrate_eom

SUITE_NAMES = ("contour", "trajectory", "action", "oracle")


def _check(name, passed, **detail):
    out = {"name": name, "passed": bool(passed)}
    out.update({k: (float(v) if isinstance(v, (int, float, np.floating))
                    and not isinstance(v, bool) else v)
                for k, v in detail.items()})
    return out


def _suite_contour():
    checks = []
    ho = Potential.harmonic()
    e = 7e-4 * np.exp(0.3j)
    val = cycle_integral(ho, e)
    rel = abs(val - 2 * np.pi * e) / abs(2 * np.pi * e)
    checks.append(_check("harmonic cycle equals 2 pi eps", rel < 1e-10,
                         rel_err=rel))

    pot = Potential.well(4)
    worst = 0.0
    for ph in (1.0, 1j, np.exp(0.25j * np.pi)):
        e = 1e-4 * ph
        ref = 2 * np.pi * e * (1 + 3 * e / 8)
        worst = max(worst, abs(cycle_integral(pot, e) - ref) / abs(ref))
    checks.append(_check("quartic cycle matches 2 pi eps (1 + 3 eps/8)",
                         worst < 1e-6, worst_rel_err=worst))

    # coefficient of the eps^2 term alone, peeled at small eps
    e = 1e-5
    coef = (cycle_integral(pot, e) / (2 * np.pi * e) - 1) / e
    checks.append(_check("quartic correction coefficient is 3/8",
                         abs(coef - 0.375) < 1e-3,
                         measured=abs(coef), target=0.375))
    return checks


def _suite_trajectory():
    checks = []
    pot = Potential.well(4)
    tr = integrate_eom(pot, 0.0, 1e-3j,
                       config=IntegratorConfig(t_max=100.0))
    checks.append(_check("energy drift within budget",
                         tr.drift < 1e-9, drift=tr.drift))

    ho = Potential.harmonic()
    e = 7e-4 * np.exp(0.3j)
    th = integrate_eom(ho, 0.1, e, config=IntegratorConfig(t_max=50.0))
    ref = harmonic_reference(0.1, e, th.sign, th.t)
    dev = float(np.abs(th.z - ref).max())
    checks.append(_check("harmonic path matches closed form",
                         dev < 1e-8, max_dev=dev))

    tr2 = integrate_eom(pot, 0.0, 1e-3,
                        config=IntegratorConfig(t_max=100.0))
    dur = cycle_durations(tr2)
    pred = 2 * np.pi + 1.5 * np.pi * 1e-3
    diff = abs(float(dur.mean()) - pred)
    checks.append(_check("real-eps cycle duration matches expansion",
                         diff < 1e-4, measured=float(dur.mean()),
                         predicted=pred, abs_diff=diff))
    return checks


def _suite_action():
    checks = []
    pot = Potential.well(4)
    sad = solve_saddle(pot, 0.0, 2.0, 2 * np.pi * 733)
    br = action_decomposed(pot, sad)
    rel = abs(br.S_direct - br.S_contour) / abs(br.S_contour)
    checks.append(_check("direct and contour actions agree",
                         rel < 1e-6, rel_err=rel))
    checks.append(_check("endpoint-derivative shortcut agrees",
                         br.shortcut_agreement < 1e-5,
                         rel_err=br.shortcut_agreement))
    checks.append(_check("exactly one of the conjugate pair is kept",
                         sad.kept != sad.conjugate_kept,
                         kept=sad.kept, conjugate_kept=sad.conjugate_kept))

    wb = wkb_actions(pot, 0.0, 2.0)
    checks.append(_check("closed-form euclidean action is 2/3",
                         abs(wb.S_E - 2.0 / 3.0) < 1e-10, S_E=wb.S_E))
    return checks


def _suite_oracle():
    checks = []
    pot = Potential.well(4)
    h = 0.12
    grid = _oracle.default_grid(pot, h)
    psi = _oracle.relax_initial_state(grid, pot)
    run = _oracle.evolve(grid, psi, pot, 60.0)
    f1 = _oracle.fit_gamma(run, 2.0, method="flux")
    f2 = _oracle.fit_gamma(run, 2.35, method="flux")
    fp = _oracle.fit_gamma(run, 2.0, method="population")
    two = abs(f2.gamma / f1.gamma - 1)
    checks.append(_check("probe currents agree", two < 0.05,
                         gamma_probe1=f1.gamma, gamma_probe2=f2.gamma,
                         rel_diff=two))
    fv = abs(fp.gamma / f1.gamma - 1)
    checks.append(_check("flux and population rates agree", fv < 0.10,
                         flux=f1.gamma, population=fp.gamma,
                         rel_diff=fv))
    checks.append(_check("decay window is cleanly exponential",
                         f1.r_squared > 0.99, r_squared=f1.r_squared))
    return checks


_SUITES = {
    "contour": _suite_contour,
    "trajectory": _suite_trajectory,
    "action": _suite_action,
    "oracle": _suite_oracle,
}


def run_suite(name):
    """Run one named suite (or "all") and return a report dict."""
    if name == "all":
        names = SUITE_NAMES
    elif name in _SUITES:
        names = (name,)
    else:
        raise KeyError(f"unknown suite {name!r}; "
                       f"choose from {SUITE_NAMES + ('all',)}")
    suites = []
    for nm in names:
        try:
            checks = _SUITES[nm]()
        except TunnelError as exc:
            checks = [_check(f"{nm} suite aborted", False,
                             error=f"{type(exc).__name__}: {exc}")]
        suites.append({
            "suite": nm,
            "checks": checks,
            "passed": all(c["passed"] for c in checks),
        })
    return {"suites": suites,
            "passed": all(s["passed"] for s in suites)}
