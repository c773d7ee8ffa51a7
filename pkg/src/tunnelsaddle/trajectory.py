"""Real-time integration of the complexified equation of motion.

The path z(t) solves zddot = -V'(z) at fixed complex energy
eps = v^2/2 + V(z). Below the barrier the motion winds around the
inner branch-point pair and, when Im eps^(n/2-1) has the outward sign,
spirals out and escapes along the real axis.

Events (inner-cycle crossings, barrier exit, endpoint passes) are
located after integration on the stored accepted steps with a cubic
Hermite interpolant and bisection to 1e-12 in t. Nothing terminates
the integration early except the escape ceiling: outward excursions
cross any fixed Re z = y many times before the final arrival, so a
terminal endpoint event would truncate genuine paths.
"""

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from ._kernels import kernels, REACHED_END, ESCAPED, BUFFER_FULL, \
    STEP_UNDERFLOW
from .errors import DomainError, EnergyDriftExceeded, InsufficientCycles, \
    NoConvergence, NoExit
from .potential import Potential


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances of the embedded 5(4) Runge-Kutta integrator."""

    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_step: float = 0.25
    t_max: float = 100.0

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0 or self.max_step <= 0:
            raise DomainError("tolerances must be positive")
        if self.t_max <= 0:
            raise DomainError("t_max must be positive")


def initial_velocity(pot, x, epsilon, sign=1):
    """sign * sqrt(2 eps - 2 V(x)) on the positive-imaginary branch.

    With sign = +1 the inner orbit is counter-clockwise; sign = -1
    gives the mirror (clockwise) orbit of the conjugate family.
    """
    v = np.sqrt(complex(pot.w(x, epsilon)))
    if v.imag < 0:
        v = -v
    return sign * v


@dataclass(frozen=True)
class Trajectory:
    """An integrated path with its event decorations.

    The energy is stored as metadata and never re-derived from the
    points except in the drift diagnostic.
    """

    pot: Potential
    epsilon: complex
    sign: int
    x: complex
    t: np.ndarray
    z: np.ndarray
    v: np.ndarray
    action: np.ndarray
    config: IntegratorConfig
    drift: float
    escaped: bool
    crossings: np.ndarray
    N: int
    exit_time: Optional[float]
    y: Optional[float] = None
    y_crossings: Optional[np.ndarray] = None

    @property
    def t_end(self):
        return float(self.t[-1])

    def state_at(self, times):
        """Cubic Hermite evaluation of (z, v) at arbitrary times."""
        tq = np.atleast_1d(np.asarray(times, dtype=float))
        if np.any(tq < self.t[0] - 1e-12) or np.any(tq > self.t[-1] + 1e-12):
            raise DomainError("query time outside the integrated range")
        tq = np.clip(tq, self.t[0], self.t[-1])
        k = np.clip(np.searchsorted(self.t, tq, side="right") - 1,
                    0, len(self.t) - 2)
        h = self.t[k + 1] - self.t[k]
        s = (tq - self.t[k]) / h
        z0, z1 = self.z[k], self.z[k + 1]
        v0, v1 = self.v[k], self.v[k + 1]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        zq = h00 * z0 + h10 * h * v0 + h01 * z1 + h11 * h * v1
        # derivative of the Hermite basis gives v to one order lower
        d00 = 6 * s * (s - 1)
        d10 = (1 - s) * (1 - 3 * s)
        d01 = -d00
        d11 = s * (3 * s - 2)
        vq = (d00 * z0 / h + d10 * v0 + d01 * z1 / h + d11 * v1)
        if np.ndim(times) == 0:
            return complex(zq[0]), complex(vq[0])
        return zq, vq

    def z_at(self, times):
        return self.state_at(times)[0]


def _hermite_event(t0, t1, f0, f1, df0, df1, target=0.0):
    """Root of the cubic Hermite interpolant of a scalar signal.

    Bisection via brentq on the interpolant, resolved to 1e-12 in t.
    """
    h = t1 - t0

    def poly(s):
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * f0 + h10 * h * df0 + h01 * f1 + h11 * h * df1
                - target)

    if poly(0.0) == 0.0:
        return t0
    if poly(1.0) == 0.0:
        return t1
    if poly(0.0) * poly(1.0) > 0:
        # interpolant disagrees with the endpoint bracket; fall back to
        # the secant location of the endpoint values
        return t0 + h * f0 / (f0 - f1)
    s = brentq(poly, 0.0, 1.0, xtol=1e-12 / max(h, 1e-12))
    return t0 + s * h


DUAL_SWITCH_RADIUS = 3.0


def integrate_eom(pot, x, epsilon, sign=1, config=None, y=None, v0=None,
                  escape_radius=None, events=True, dual_frame=False,
                  _retries=2):
    """Integrate the equation of motion and decorate with events.

    Cycle crossings are sign changes of Im z inside |z| < 2 r_nl (the
    inner winding region); N = floor(crossings / 2). exit_time is the
    first upward passage of Re z through the barrier exit b. When y is
    given, all upward passages of Re z = y are recorded. The energy
    drift budget 1e-9 * max(1, |eps|) is enforced; a violation tightens
    the step controls and retries before raising EnergyDriftExceeded.

    dual_frame=True (canonical quartic well only) integrates outward
    excursions past |z| = 3 in the inverse chart w = 1/z, where pole
    passages are regular. Escape detection is then effectively off, so
    the path runs to t_max no matter how tall the excursions grow; use
    it to verify saddles whose endpoint time sits beyond the escape
    cascade, not to detect escape.
    """
    if config is None:
        config = IntegratorConfig()
    eps = complex(epsilon)
    if not pot.is_harmonic and abs(eps) >= pot.barrier_height():
        raise DomainError("epsilon must lie below the barrier top")
    if v0 is None:
        v0 = initial_velocity(pot, x, eps, sign)
    if escape_radius is None:
        escape_radius = 1e6 if pot.is_harmonic else 10.0 * pot.barrier_exit()
    if dual_frame and pot.family_exponent != 4:
        raise DomainError("the inverse chart is exact only for the "
                          "canonical quartic well")
    dual_r = DUAL_SWITCH_RADIUS if dual_frame else 0.0

    t_end = float(config.t_max)
    cap = int(t_end * 160) + 4096
    dvc = pot.dV_coeffs()
    vc = np.asarray(pot.coeffs, dtype=complex)

    ts = np.empty(cap)
    zs = np.empty(cap, dtype=complex)
    vs = np.empty(cap, dtype=complex)
    As = np.empty(cap, dtype=complex)
    cnt, status = kernels.advance_path(
        dvc, vc, complex(x), complex(v0), t_end, config.rel_tol,
        config.abs_tol, config.max_step, escape_radius ** 2, dual_r,
        ts, zs, vs, As)
    if status == BUFFER_FULL:
        cap *= 4
        ts = np.empty(cap)
        zs = np.empty(cap, dtype=complex)
        vs = np.empty(cap, dtype=complex)
        As = np.empty(cap, dtype=complex)
        cnt, status = kernels.advance_path(
            dvc, vc, complex(x), complex(v0), t_end, config.rel_tol,
            config.abs_tol, config.max_step, escape_radius ** 2, dual_r,
            ts, zs, vs, As)
    if status == BUFFER_FULL or status == STEP_UNDERFLOW:
        raise NoConvergence(f"integrator stalled with status {status}",
                            best=(ts[cnt - 1], zs[cnt - 1]))

    t = ts[:cnt].copy()
    z = zs[:cnt].copy()
    v = vs[:cnt].copy()
    A = As[:cnt].copy()

    from .potential import poly_eval
    # Energy is a difference of O(|z|^n) terms, so |E - eps| carries
    # rounding noise ~ eps_mach * |V(z)| on far excursions. Measure the
    # drift only where the evaluation is well-conditioned.
    cond = max(3.0 * pot.barrier_exit() if not pot.is_harmonic else 0.0,
               abs(complex(x)) + 1.0, np.sqrt(2.0 * abs(eps)) + 1.0)
    E = v * v / 2.0 + poly_eval(vc, z)
    well = np.abs(z) <= cond
    drift = float(np.max(np.abs(E[well] - eps))) if well.any() else 0.0
    budget = 1e-9 * max(1.0, abs(eps))
    if drift > budget:
        if _retries > 0:
            tighter = replace(config,
                              rel_tol=max(config.rel_tol / 16.0, 1e-15),
                              abs_tol=max(config.abs_tol / 16.0, 3e-16),
                              max_step=config.max_step / 2.0)
            return integrate_eom(pot, x, eps, sign, tighter, y, v0,
                                 escape_radius, events, dual_frame,
                                 _retries - 1)
        raise EnergyDriftExceeded(
            f"energy drift {drift:.3e} exceeds budget {budget:.3e}",
            drift=drift, budget=budget)

    crossings = np.empty(0)
    exit_time = None
    y_crossings = None
    if events:
        gate = 2.0 * pot.nonlinear_scale(eps) if eps != 0 else np.inf

        # inner-cycle crossings: sign changes of Im z inside the gate
        im = z.imag
        absz = np.abs(z)
        sgn = np.sign(im)
        nz = sgn != 0
        flips = np.where((sgn[:-1] * sgn[1:] < 0) & nz[:-1] & nz[1:])[0]
        found = []
        for k in flips:
            if min(absz[k], absz[k + 1]) < gate:
                tc = _hermite_event(t[k], t[k + 1], im[k], im[k + 1],
                                    v[k].imag, v[k + 1].imag)
                s = (tc - t[k]) / (t[k + 1] - t[k])
                if (1 - s) * absz[k] + s * absz[k + 1] < gate:
                    found.append(tc)
        crossings = np.asarray(found)

        def upward(values, dvalues, level):
            f = values - level
            idx = np.where((f[:-1] < 0) & (f[1:] >= 0))[0]
            return np.array([
                _hermite_event(t[k], t[k + 1], f[k], f[k + 1],
                               dvalues[k], dvalues[k + 1]) for k in idx])

        if not pot.is_harmonic:
            ex = upward(z.real, v.real, pot.barrier_exit())
            if len(ex):
                exit_time = float(ex[0])

        if y is not None:
            y_crossings = upward(z.real, v.real, float(y))

    return Trajectory(pot=pot, epsilon=eps, sign=int(sign), x=complex(x),
                      t=t, z=z, v=v, action=A, config=config, drift=drift,
                      escaped=(status == ESCAPED), crossings=crossings,
                      N=len(crossings) // 2, exit_time=exit_time,
                      y=y, y_crossings=y_crossings)


def harmonic_reference(x, epsilon, sign, t):
    """z_ho(t) = x cos t + sign*sqrt(2 eps - x^2) sin t.

    Same branch convention as initial_velocity, with the curvature of
    the false-vacuum parabola setting the unit frequency.
    """
    v = np.sqrt(complex(2.0 * epsilon - complex(x) ** 2))
    if v.imag < 0:
        v = -v
    t = np.asarray(t, dtype=float)
    return x * np.cos(t) + sign * v * np.sin(t)


def velocity_phase_winding(traj):
    """Continuous winding of arg v along the path, in turns.

    One inner cycle advances the velocity phase by one turn, so the
    rounded winding counts cut encirclements without any radius gate.
    """
    dphi = np.angle(traj.v[1:] / traj.v[:-1])
    return float(dphi.sum() / (2.0 * np.pi))


def cycle_durations(traj, level=0.0):
    """Durations between successive upward passages of Re z = level.

    One passage per inner cycle, so diffs of the passage times measure
    the cycle period directly.
    """
    f = traj.z.real - level
    df = traj.v.real
    idx = np.where((f[:-1] < 0) & (f[1:] >= 0))[0]
    times = np.array([
        _hermite_event(traj.t[k], traj.t[k + 1], f[k], f[k + 1],
                       df[k], df[k + 1]) for k in idx])
    if len(times) < 3:
        raise InsufficientCycles("need at least three upward passages")
    return np.diff(times)


def cycle_amplitudes(traj):
    """max |z| per cycle, delimited by upward passages of Re z = 0.

    The per-cycle peak is refined by a parabolic fit of |z|^2 through
    the largest sample and its neighbors, evaluated on the Hermite
    interpolant; the raw sample maximum carries an O(h^2) dip that
    masks slow cycle-to-cycle trends.
    """
    f = traj.z.real
    idx = np.where((f[:-1] < 0) & (f[1:] >= 0))[0]
    if len(idx) < 3:
        raise InsufficientCycles("need at least three cycles")
    amps = []
    for a, b in zip(idx[:-1], idx[1:]):
        seg = np.abs(traj.z[a:b + 1])
        k = a + int(np.argmax(seg))
        if k == 0 or k == len(traj.t) - 1:
            amps.append(seg.max())
            continue
        y0, y1, y2 = (abs(traj.z[k - 1]) ** 2, abs(traj.z[k]) ** 2,
                      abs(traj.z[k + 1]) ** 2)
        t0, t1, t2 = traj.t[k - 1], traj.t[k], traj.t[k + 1]
        # vertex of the parabola through three (t, |z|^2) points
        d1 = (y1 - y0) / (t1 - t0)
        d2 = (y2 - y1) / (t2 - t1)
        curv = (d2 - d1) / (t2 - t0)
        if curv >= 0:
            amps.append(seg.max())
            continue
        tv = 0.5 * (t0 + t1 - d1 / curv)
        tv = min(max(tv, t0), t2)
        amps.append(abs(traj.state_at(tv)[0]))
    return np.asarray(amps)


def drift_coefficient(traj, t_window=None):
    """Secular drift amplitude of z - z_ho against t cos t.

    The model includes the mirror secular column t sin t, a constant,
    and oscillatory harmonics up to 2(n-1) so the periodic nonlinear
    response does not alias into the secular coefficient. Needs at
    least 5 inner cycles in the window.
    """
    eps = traj.epsilon
    if t_window is None:
        t_hi = traj.exit_time if traj.exit_time else traj.t_end
        t_window = (0.0, min(traj.t_end, 0.9 * t_hi))
    lo, hi = t_window
    m = (traj.t >= lo) & (traj.t <= hi)
    if (hi - lo) < 10.0 * np.pi:
        raise InsufficientCycles("window shorter than five cycles")
    t = traj.t[m]
    delta = traj.z[m] - harmonic_reference(traj.x.real, eps, traj.sign, t)
    nharm = 2 * (traj.pot.n - 1)
    cols = [t * np.cos(t), t * np.sin(t), np.ones_like(t)]
    for k in range(1, nharm + 1):
        cols.append(np.sin(k * t))
        cols.append(np.cos(k * t))
    M = np.stack(cols, axis=1).astype(complex)
    coef, *_ = np.linalg.lstsq(M, delta, rcond=None)
    return complex(coef[0])


def exit_tail(traj, y=None):
    """Final-outgoing-branch samples (Re z, |Im z|) and tail exponent.

    The path may poke past the barrier exit several times before the
    escape that sticks, so the fit restricts to samples after |z| last
    left 1.5 b. The initial rise of |Im z| on that branch is dropped;
    the remainder must decay monotonically while Re z grows. Fits
    ln |Im z| against ln Re z and returns (points, exponent). The
    exponent is reported, not asserted: candidate references are -1
    and -(n-1).
    """
    if traj.exit_time is None:
        raise NoExit("trajectory never crossed the barrier exit")
    b = traj.pot.barrier_exit()
    inside = np.where(np.abs(traj.z) <= 1.5 * b)[0]
    k0 = int(inside[-1]) + 1 if len(inside) else 0
    zr, zi = traj.z[k0:].real, np.abs(traj.z[k0:].imag)
    if y is not None:
        keep = zr <= y
        zr, zi = zr[keep], zi[keep]
    if len(zr) >= 8:
        pk = int(np.argmax(zi))
        zr, zi = zr[pk:], zi[pk:]
    if len(zr) < 8:
        raise NoExit("too few samples on the outgoing branch")
    if not (np.all(np.diff(zr) > 0) and np.all(np.diff(zi) < 1e-12)):
        raise NoExit("outgoing branch not monotone")
    good = zi > 0
    slope = np.polyfit(np.log(zr[good]), np.log(zi[good]), 1)[0]
    return np.stack([zr, zi], axis=1), float(slope)
