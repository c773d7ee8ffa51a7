"""Branch-tracked contour and line integrals of the velocity function.

Everything here evaluates integrals of v(z) = sqrt(2 eps - 2 V(z)) or
1/v(z) with an explicitly tracked square-root branch. The inner
branch-point pair (z-, z+) pinches the origin as eps -> 0; one positive
cycle around that cut gives the per-cycle area integral I(eps) and the
per-cycle time T(eps) = dI/deps. The real-line piece from x to y closes
the route to the endpoint.

Branch policy: square roots are continued step to step along each path
(flip whenever |v_k - v_{k-1}| > |v_k + v_{k-1}|), never taken pointwise
by principal value. Anchors are recorded in results so a caller can
reproduce the sheet.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma

from ._kernels import kernels
from .errors import BranchAmbiguity, CutCollision, DomainError, \
    FitIllConditioned, NoConvergence
from .potential import Potential, euclidean_segment, poly_eval


@dataclass(frozen=True)
class BranchTrackedPath:
    """Positions with a continuous branch of v = sqrt(2 eps - 2 V)."""

    points: np.ndarray
    velocity: np.ndarray
    epsilon: complex
    anchor: complex

    def validate(self, pot):
        w = pot.w(self.points, self.epsilon)
        res = np.abs(self.velocity ** 2 - w)
        scale = np.maximum(np.abs(w), 1e-300)
        if np.max(res / scale) > 1e-12:
            raise BranchAmbiguity("tracked branch violates v^2 = w")
        step = np.abs(np.diff(self.velocity))
        summ = np.abs(self.velocity[1:] + self.velocity[:-1])
        if np.any(step >= summ):
            raise BranchAmbiguity("branch continuity broken between nodes")


def tracked_sqrt(pot, points, epsilon, anchor=None):
    """Continue sqrt(2 eps - 2 V) along a discrete path.

    anchor overrides the starting value (must square to w(points[0])).
    Refuses steps where the two sheet choices are indistinguishable.
    """
    pts = np.asarray(points, dtype=complex)
    w = pot.w(pts, epsilon)
    v = np.sqrt(w)
    if anchor is not None:
        if abs(anchor ** 2 - w[0]) > 1e-10 * max(abs(w[0]), 1e-300):
            raise DomainError("anchor does not square to w at start")
        if abs(anchor - v[0]) > abs(anchor + v[0]):
            v[0] = -v[0]
    for k in range(1, len(v)):
        d_keep = abs(v[k] - v[k - 1])
        d_flip = abs(v[k] + v[k - 1])
        if d_flip < d_keep:
            v[k] = -v[k]
            d_keep, d_flip = d_flip, d_keep
        if d_flip - d_keep < 1e-13 * max(abs(v[k]), 1e-300):
            raise BranchAmbiguity(
                "sheet choice ambiguous; refine the path sampling")
    return BranchTrackedPath(points=pts, velocity=v, epsilon=complex(epsilon),
                             anchor=complex(v[0]))


@dataclass(frozen=True)
class CycleResult:
    """One positive cycle around the inner cut."""

    I: complex
    T: complex
    nodes: int
    closure: float
    center: complex
    radius: float


def _inner_cut_geometry(pot, epsilon, radius=None):
    zm, zp = pot.inner_branch_points(epsilon)
    center = (zp + zm) / 2.0
    r_in = max(abs(zp - center), abs(zm - center))
    outer = pot.outer_roots(epsilon, (zm, zp))
    if len(outer):
        sep = np.min(np.abs(outer - center))
        if sep <= 10.0 * max(abs(zp), abs(zm)):
            raise CutCollision(
                f"outer root at distance {sep:.3e} crowds the inner cut "
                f"(|z+| = {abs(zp):.3e})")
    else:
        sep = np.inf
    R = 3.0 * r_in if radius is None else float(radius)
    if not (r_in < R < sep):
        raise DomainError("cycle radius must separate the cut from "
                          "the outer roots")
    return center, R


def cycle_integrals(pot, epsilon, radius=None, rel_tol=1e-11):
    """(I, T) = (contour integral of v dz, of dz/v) around the inner cut.

    Trapezoid on a circle enclosing only (z-, z+), nodes doubled from 64
    until both integrals stabilize to rel_tol and the tracked branch
    closes. Orientation is normalized so I ~ +2 pi eps at small eps.
    """
    eps = complex(epsilon)
    if eps == 0:
        raise DomainError("cycle integrals need epsilon != 0")
    center, R = _inner_cut_geometry(pot, eps, radius)
    wc = pot.w_coeffs(eps)

    M = 64
    prev = None
    while M <= 2 ** 20:
        I, T, closure = kernels.cycle_sums(wc, center.real, center.imag,
                                           R, M)
        vscale = math.sqrt(abs(poly_eval(wc, center + R))) + 1e-300
        if prev is not None:
            dI = abs(I - prev[0]) / max(abs(I), abs(2 * math.pi * eps))
            dT = abs(T - prev[1]) / max(abs(T), 1e-300)
            if dI < rel_tol and dT < rel_tol and closure < 1e-10 * vscale:
                break
        prev = (I, T)
        M *= 2
    else:
        raise NoConvergence("cycle quadrature did not stabilize",
                            best=prev, residual=closure)

    if (I / (2 * math.pi * eps)).real < 0:
        I, T = -I, -T
    return CycleResult(I=I, T=T, nodes=M, closure=float(closure),
                       center=center, radius=R)


def cycle_integral(pot, epsilon, **kw):
    return cycle_integrals(pot, epsilon, **kw).I


def cycle_time_integral(pot, epsilon, **kw):
    return cycle_integrals(pot, epsilon, **kw).T


def a_i_closed_form(n):
    """Leading cycle-series coefficient for the even-n family."""
    if n < 3 or n % 2:
        raise DomainError("closed form holds for even n >= 4")
    return float(2.0 * gamma((n + 1) / 2.0) * 2.0 ** ((n - 2) / 2.0)
                 / (n * math.sqrt(math.pi) * gamma(n / 2.0 + 1.0)))


def _segment_minimum(pot, x, y, epsilon, samples=4096):
    r = np.linspace(x, y, samples)
    return float(np.min(np.abs(pot.w(r, epsilon))))


def real_line_S(pot, x, y, epsilon):
    """S = integral over [x, y] of sqrt(2 eps - 2 V(r)) dr.

    The branch is continued from the positive-imaginary square root just
    above x when Im eps >= 0 (the outgoing branch of the decaying
    saddle); the conjugate family (Im eps < 0) uses the mirror anchor.
    Since Im(2 eps - 2 V) = 2 Im eps is constant on the real segment,
    that branch is the principal square root throughout and never meets
    the cut. At eps = 0 the integral is assembled from the Euclidean
    and free closed-form pieces.
    """
    x, y = float(x), float(y)
    if x == y:
        return 0.0 + 0.0j
    eps = complex(epsilon)
    if eps == 0:
        b = None if pot.is_harmonic else pot.barrier_exit()
        if pot.is_harmonic:
            return 1j * euclidean_segment(pot, x, y)
        lo, hi = (x, y) if x < y else (y, x)
        sE = euclidean_segment(pot, lo, min(hi, b)) if lo < b else 0.0
        sF = 0.0
        if hi > b:
            sF = quad(lambda r: math.sqrt(max(-2 * pot.V(r).real, 0.0)),
                      max(lo, b), hi, epsabs=1e-14, limit=200)[0]
        sign = 1.0 if y > x else -1.0
        return sign * (1j * sE + sF)

    if _segment_minimum(pot, x, y, eps) < 1e-28:
        raise BranchAmbiguity("velocity vanishes on the integration "
                              "segment; branch undefined")

    def f_re(r):
        return np.sqrt(pot.w(r, eps)).real

    def f_im(r):
        return np.sqrt(pot.w(r, eps)).imag

    pts = []
    if not pot.is_harmonic:
        _, zp = pot.inner_branch_points(eps)
        for p in (abs(zp), pot.barrier_exit()):
            if min(x, y) < p < max(x, y):
                pts.append(p)
    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=400,
              points=pts or None)
    re = quad(f_re, x, y, **kw)[0]
    im = quad(f_im, x, y, **kw)[0]
    val = re + 1j * im
    if eps.imag < 0:
        # principal sqrt already carries the mirrored anchor; nothing
        # to flip, but keep the branch statement explicit
        pass
    return val


def real_line_T(pot, x, y, epsilon):
    """Traversal time integral over [x, y] of dr / sqrt(2 eps - 2 V)."""
    eps = complex(epsilon)
    if eps == 0:
        raise DomainError("time integral diverges at eps = 0")
    x, y = float(x), float(y)
    if x == y:
        return 0.0 + 0.0j
    if _segment_minimum(pot, x, y, eps) < 1e-28:
        raise BranchAmbiguity("velocity vanishes on the segment")

    def f_re(r):
        return (1.0 / np.sqrt(pot.w(r, eps))).real

    def f_im(r):
        return (1.0 / np.sqrt(pot.w(r, eps))).imag

    pts = []
    if not pot.is_harmonic:
        _, zp = pot.inner_branch_points(eps)
        for p in (abs(zp), pot.barrier_exit()):
            if min(x, y) < p < max(x, y):
                pts.append(p)
    else:
        tp = math.sqrt(2.0 * abs(eps))
        if min(x, y) < tp < max(x, y):
            pts.append(tp)
    kw = dict(epsabs=1e-13, epsrel=1e-12, limit=400, points=pts or None)
    re = quad(f_re, x, y, **kw)[0]
    im = quad(f_im, x, y, **kw)[0]
    return re + 1j * im


@dataclass(frozen=True)
class SeriesCoefficients:
    """Fitted small-eps behavior of the line and cycle integrals.

    S(eps) = S0 + i A_S eps ln eps + B_S eps on a fixed-phase ray;
    I(eps) = 2 pi eps (1 + A_I eps^(n/2-1) + ...). A_S_err is the
    one-sigma uncertainty from the fit residual.
    """

    A_I: complex
    A_S: float
    B_S: complex
    S0: complex
    A_S_err: float
    A_S_imag: float
    residual_S: float
    residual_I: float
    alt_exponent_residuals: Optional[dict] = None


def _scaled_lstsq(columns, rhs):
    M = np.stack(columns, axis=1).astype(complex)
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms == 0):
        raise FitIllConditioned("degenerate design column")
    Mn = M / norms
    cond = np.linalg.cond(Mn)
    if cond > 1e12:
        raise FitIllConditioned(f"design condition number {cond:.3e}")
    coef, res, *_ = np.linalg.lstsq(Mn, rhs, rcond=None)
    coef = coef / norms
    resid = rhs - M @ coef
    dof = max(len(rhs) - len(columns), 1)
    sigma2 = float(np.vdot(resid, resid).real) / dof
    cov = np.linalg.inv(Mn.conj().T @ Mn).real
    errs = np.sqrt(np.maximum(np.diag(cov) * sigma2, 0.0)) / norms
    return coef, errs, float(np.linalg.norm(resid))


def extract_log_coefficient(pot, x, y, epsilon_samples):
    """Fit the eps ln eps enhancement of S and the cycle series of I.

    epsilon_samples must lie on one fixed-phase ray, geometrically
    spaced, at least 6 of them. For odd n the cycle correction is fitted
    against both candidate exponents (n/2 - 1 and n - 2) and the
    residuals of each are reported.
    """
    eps = np.asarray(sorted(epsilon_samples, key=abs), dtype=complex)
    if len(eps) < 6:
        raise DomainError("need at least 6 samples")
    phases = np.angle(eps / eps[-1])
    if np.max(np.abs(phases)) > 1e-9:
        raise DomainError("samples must share one phase")

    S0 = real_line_S(pot, x, y, 0.0)
    Svals = np.array([real_line_S(pot, x, y, e) for e in eps])
    cols = [eps * np.log(eps), eps]
    coef, errs, resS = _scaled_lstsq(cols, Svals - S0)
    cAS = coef[0] / 1j
    A_S = float(cAS.real)
    A_S_err = float(errs[0])
    B_S = complex(coef[1])

    n = pot.n
    p_lead = n / 2.0 - 1.0
    Ivals = np.array([cycle_integral(pot, e) for e in eps])
    ratio = Ivals / (2 * np.pi * eps) - 1.0
    colsI = [eps ** p_lead, eps ** (2 * p_lead)]
    coefI, _, resI = _scaled_lstsq(colsI, ratio)
    A_I = complex(coefI[0])

    alt = None
    if n % 2:
        colsA = [eps ** (n - 2.0), eps ** (2.0 * (n - 2.0))]
        _, _, resA = _scaled_lstsq(colsA, ratio)
        alt = {"exponent_lead": p_lead, "residual_lead": resI,
               "exponent_alt": float(n - 2), "residual_alt": resA}

    return SeriesCoefficients(A_I=A_I, A_S=A_S, B_S=B_S, S0=S0,
                              A_S_err=A_S_err, A_S_imag=float(cAS.imag),
                              residual_S=resS, residual_I=resI,
                              alt_exponent_residuals=alt)


def reference_scale(epsilon, r_nl):
    """Geometric mean of the inner turning scale and the cut radius."""
    return math.sqrt(math.sqrt(2.0 * abs(epsilon)) * r_nl)
