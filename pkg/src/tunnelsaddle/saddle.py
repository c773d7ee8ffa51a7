"""Boundary-value solver for the complex energy of a tunneling path.

Given real endpoints (x, y) and a real total time t, the saddle energy
solves t(eps) = N T_cycle(eps) + T_line(eps) with Im t = 0. The time
map is smooth in eps at fixed winding number N, so a damped Newton
iteration on (Re eps, Im eps) converges from the cycle-count-law seed.
The map is also exact: the quartic solution is doubly periodic in
complex time, so a path that winds N times and then runs down the line
arrives at y at exactly the mapped time. The ODE shoot therefore only
verifies the converged energy; it never refines it. Shooting residuals
as functions of eps are dominated by the near-pole cascade of the last
few cycles and make a useless Newton objective.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .contour import a_i_closed_form, cycle_integrals, real_line_S, \
    real_line_T
from .errors import CutCollision, DomainError, NoConvergence, \
    PhaseConstraintViolated, WrongBasin
from .potential import Potential
from .trajectory import IntegratorConfig, Trajectory, integrate_eom, \
    velocity_phase_winding

A_S_LAW = 0.5

_AI_CACHE = {}


def _a_i(pot):
    """Leading cycle-series coefficient entering the count law."""
    key = pot.coeffs
    if key not in _AI_CACHE:
        n = pot.n
        if n % 2 == 0:
            _AI_CACHE[key] = a_i_closed_form(n)
        else:
            # no closed form for odd n; fit the leading parameterization
            # on a reference ray
            eps = 2e-3j * 0.5 ** np.arange(6)
            vals = np.array([cycle_integrals(pot, e).I for e in eps])
            ratio = vals / (2 * np.pi * eps) - 1.0
            p = n / 2.0 - 1.0
            M = np.stack([eps ** p, eps ** (2 * p)], axis=1)
            coef = np.linalg.lstsq(M, ratio, rcond=None)[0]
            _AI_CACHE[key] = abs(complex(coef[0]))
    return _AI_CACHE[key]


def _outward_phase(pot, epsilon):
    eps = complex(epsilon)
    ph = eps ** (pot.n / 2.0 - 1.0)
    if abs(ph.imag) < 1e-12 * abs(ph):
        raise PhaseConstraintViolated(
            "Im eps^(n/2-1) = 0 admits no outward spiral")
    return ph.imag


def n_of_epsilon(pot, epsilon, series=None):
    """Cycle-count law N(eps).

    The leading form is (A_S/(n pi A_I)) (-ln|eps|)/Im eps^(n/2-1).
    Passing a SeriesCoefficients fit refines it with the constant terms
    of the full Im t = 0 balance,
    N = [A_S(-ln|eps| - 1) - Im B_S] / (n pi A_I Im eps^(n/2-1)),
    which is accurate at the sub-percent level.
    """
    eps = complex(epsilon)
    im_ph = _outward_phase(pot, eps)
    n = pot.n
    if series is None:
        return (A_S_LAW / (n * math.pi * _a_i(pot))) \
            * (-math.log(abs(eps))) / im_ph
    num = series.A_S * (-math.log(abs(eps)) - 1.0) - series.B_S.imag
    return num / (n * math.pi * abs(series.A_I) * im_ph)


def epsilon_to_time(pot, x, y, epsilon, N):
    """t(eps) = N T_cycle + line traversal time from x to y.

    The imaginary part measures how far eps sits from a true real-time
    saddle; Im t = 0 at the solution.
    """
    if N < 1:
        raise DomainError("need at least one cycle")
    cyc = cycle_integrals(pot, epsilon)
    return N * cyc.T + real_line_T(pot, x, y, epsilon)


def _seed_from_time(pot, t_target, phase=math.pi / 2):
    """Invert the leading count law for |eps| on a fixed-phase ray."""
    n = pot.n
    c = A_S_LAW / (n * math.pi * _a_i(pot))
    N_t = t_target / (2 * math.pi)
    s_ph = math.sin(phase * (n / 2.0 - 1.0))
    if abs(s_ph) < 1e-12:
        raise PhaseConstraintViolated("seed ray violates the outward "
                                      "phase constraint")
    top = pot.barrier_height()

    def g(lu):
        u = math.exp(lu)
        return c * (-lu) / (u ** (n / 2.0 - 1.0) * s_ph) - N_t

    lo, hi = math.log(1e-14), math.log(0.5 * top)
    if g(lo) < 0 or g(hi) > 0:
        raise NoConvergence("count law has no root for this t_target")
    lu = brentq(g, lo, hi, xtol=1e-13)
    return math.exp(lu) * complex(math.cos(phase), math.sin(phase))


def contour_action(pot, x, y, epsilon, N, t):
    """S = N I + S_line - eps t, the contour-assembled action."""
    return (N * cycle_integrals(pot, epsilon).I
            + real_line_S(pot, x, y, epsilon) - complex(epsilon) * t)


@dataclass(frozen=True)
class SaddleSolution:
    """A converged complex-energy saddle of the (x, y, t) problem."""

    epsilon: complex
    N: int
    t: float
    x: float
    y: float
    kept: bool
    residual: complex
    mismatch: float
    winding: float
    conjugate_epsilon: complex
    conjugate_kept: bool
    iterations: int
    history: tuple
    verification: Optional[Trajectory] = field(
        default=None, repr=False, compare=False)

    def as_dict(self):
        return {
            "epsilon": [self.epsilon.real, self.epsilon.imag],
            "N": self.N, "t": self.t, "x": self.x, "y": self.y,
            "kept": self.kept,
            "residual": [self.residual.real, self.residual.imag],
            "mismatch": self.mismatch, "winding": self.winding,
            "conjugate_epsilon": [self.conjugate_epsilon.real,
                                  self.conjugate_epsilon.imag],
            "conjugate_kept": self.conjugate_kept,
            "iterations": self.iterations,
            "residual_history": [[e.real, e.imag, r]
                                 for e, r in self.history],
        }


def _map_newton(pot, x, y, t_target, eps0, N, tol=1e-8, max_iter=60):
    eps = complex(eps0)
    top = np.inf if pot.is_harmonic else pot.barrier_height()
    history = []
    g = epsilon_to_time(pot, x, y, eps, N) - t_target
    for it in range(max_iter):
        history.append((eps, abs(g)))
        if abs(g) < tol:
            return eps, g, it, history
        h = 1e-6 * abs(eps)
        d = (epsilon_to_time(pot, x, y, eps + h, N)
             - epsilon_to_time(pot, x, y, eps - h, N)) / (2 * h)
        step = -g / d
        lam = 1.0
        while abs(eps + lam * step) >= 0.95 * top and lam > 1e-6:
            lam /= 2
        accepted = False
        while lam >= 1.0 / 1024:
            cand = eps + lam * step
            try:
                g_new = epsilon_to_time(pot, x, y, cand, N) - t_target
            except CutCollision:
                # candidate wandered into the crowded-cut region
                lam /= 2
                continue
            if abs(g_new) < abs(g):
                eps, g = cand, g_new
                accepted = True
                break
            lam /= 2
        if not accepted:
            raise NoConvergence("time-map Newton stalled",
                                best=eps, residual=g, history=history)
    raise NoConvergence("time-map Newton exceeded iteration cap",
                        best=eps, residual=g, history=history)


def _shoot(pot, x, y, epsilon, t_target, rtol, events):
    cfg = IntegratorConfig(rel_tol=rtol, abs_tol=rtol * 1e-2,
                           max_step=0.25, t_max=t_target)
    return integrate_eom(pot, x, epsilon, sign=1, config=cfg,
                         y=(y if events else None), events=events,
                         dual_frame=(pot.family_exponent == 4))


def solve_saddle(pot, x, y, t_target, seed=None, ode_rtol=1e-12,
                 max_iter=60):
    """Solve for the complex energy reaching y from x at time t_target.

    Two stages: damped Newton on the smooth contour time map with the
    winding number N held fixed at the rounded count-law seed, then a
    full ODE shoot to t_target that verifies the converged energy by
    reporting the endpoint mismatch |z(t) - y| and the velocity-phase
    winding. For the quartic family the shoot crosses the outward
    cascade in the inverse chart and the mismatch resolves the saddle
    to near roundoff; other families integrate the physical chart only
    and the shoot usually ends at the escape ceiling, in which case the
    partial winding is not checked against N. The conjugate energy is
    classified and discarded; WrongBasin signals a verified winding
    different from the held N.
    """
    x, y = float(x), float(y)
    t_target = float(t_target)
    if pot.is_harmonic:
        raise NoConvergence("no tunneling exit exists in a pure parabola")
    if t_target < 4 * math.pi:
        raise DomainError("t_target must cover several cycles")
    if y <= pot.barrier_exit():
        raise DomainError("endpoint y must lie beyond the barrier exit")

    if seed is None:
        eps0 = _seed_from_time(pot, t_target)
    else:
        eps0 = complex(seed)
    N = int(round(n_of_epsilon(pot, eps0)))
    if N < 1:
        raise DomainError("count-law seed gives no complete cycle")

    eps, g, iters, history = _map_newton(
        pot, x, y, t_target, eps0, N, max_iter=max_iter)

    verify = _shoot(pot, x, y, eps, t_target, ode_rtol, events=True)
    mismatch = abs(verify.z[-1] - y)
    winding = velocity_phase_winding(verify)
    residual = g

    S = contour_action(pot, x, y, eps, N, t_target)
    kept = S.imag > 0  # Re(i S) = -Im S < 0
    eps_conj = eps.conjugate()
    S_conj = contour_action(pot, x, y, eps_conj, N, t_target)
    conj_kept = S_conj.imag > 0

    sol = SaddleSolution(
        epsilon=eps, N=N, t=t_target, x=x, y=y, kept=kept,
        residual=residual, mismatch=mismatch, winding=winding,
        conjugate_epsilon=eps_conj, conjugate_kept=conj_kept,
        iterations=iters, history=tuple(history),
        verification=verify)

    if not verify.escaped:
        N_dyn = int(round(winding))
        if N_dyn != N:
            raise WrongBasin(
                f"verified winding {N_dyn} differs from held N {N}",
                requested=N, converged=N_dyn, best=sol)
    return sol


def multi_instanton_epsilon(pot, m, epsilon0):
    """Energy estimate for the (2m+1)-instanton configuration.

    Solves N(eps_m) = N(eps_0) with the count law carrying the (2m+1)
    prefactor, by 1D root finding along the fixed-phase ray of eps_0.
    """
    if m < 0 or int(m) != m:
        raise DomainError("m must be a non-negative integer")
    eps0 = complex(epsilon0)
    if m == 0:
        return eps0
    N0 = n_of_epsilon(pot, eps0)
    n = pot.n
    phase = math.atan2(eps0.imag, eps0.real)
    s_ph = math.sin(phase * (n / 2.0 - 1.0))
    if abs(s_ph) < 1e-12:
        raise PhaseConstraintViolated("fixed-phase ray admits no "
                                      "outward spiral")
    c = (2 * m + 1) * A_S_LAW / (n * math.pi * _a_i(pot))
    top = pot.barrier_height()

    def g(lu):
        u = math.exp(lu)
        return c * (-lu) / (u ** (n / 2.0 - 1.0) * s_ph) - N0

    lo = math.log(abs(eps0)) - 1.0
    hi = math.log(min(0.9 * top, abs(eps0) * 10 * (2 * m + 1)))
    if g(hi) > 0:
        raise NoConvergence("multi-instanton energy exceeds the barrier "
                            "regime", best=math.exp(hi))
    lu = brentq(g, lo, hi, xtol=1e-13)
    return math.exp(lu) * complex(math.cos(phase), math.sin(phase))
