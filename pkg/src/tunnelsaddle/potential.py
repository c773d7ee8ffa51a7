"""Polynomial potentials with a false-vacuum parabola at the origin.

The canonical family is V(z) = z^2/2 - z^n/n for integer n >= 3: a
quadratic minimum at z = 0, a barrier peak at z = 1 of height
1/2 - 1/n, and an unbounded rolldown beyond the exit b = (n/2)^(1/(n-2)).
A general real-coefficient polynomial with the same normalization
V(0) = V'(0) = 0, V''(0) = 1 is accepted behind the same interface;
closed-form test values exist only for the canonical family.

All evaluation works for complex z. Coefficients are stored ascending
(coeffs[k] multiplies z^k).
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import AmbiguousRoot, DomainError, NoConvergence

_NEWTON_CAP = 50


def poly_eval(coeffs, z):
    """Horner evaluation of an ascending-coefficient polynomial."""
    z = np.asarray(z, dtype=complex)
    r = np.zeros_like(z)
    for c in tuple(coeffs)[::-1]:
        r = r * z + c
    return r if r.ndim else complex(r)


@dataclass(frozen=True)
class Potential:
    """A real-coefficient polynomial potential, ascending coefficients.

    Invariants enforced at construction: V(0) = 0, V'(0) = 0, V''(0) = 1.
    """

    coeffs: tuple

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or len(c) < 3:
            raise DomainError("potential needs at least a quadratic term")
        if c[0] != 0.0 or c[1] != 0.0 or c[2] != 0.5:
            raise DomainError("potential must satisfy V(0)=V'(0)=0, V''(0)=1")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))

    @classmethod
    def well(cls, n):
        """The canonical family V(z) = z^2/2 - z^n/n."""
        n = int(n)
        if n < 3:
            raise DomainError("family exponent must satisfy n >= 3")
        c = np.zeros(n + 1)
        c[2] = 0.5
        c[n] = -1.0 / n
        return cls(tuple(c))

    @classmethod
    def harmonic(cls):
        """Pure parabola z^2/2; trapped orbits only, no barrier exit."""
        return cls((0.0, 0.0, 0.5))

    # -- evaluation --------------------------------------------------------

    def V(self, z):
        return poly_eval(self.coeffs, z)

    def dV(self, z):
        dc = [k * c for k, c in enumerate(self.coeffs)][1:]
        return poly_eval(dc, z)

    def w(self, z, epsilon):
        """The squared velocity 2*epsilon - 2*V(z)."""
        return 2.0 * epsilon - 2.0 * self.V(z)

    def w_coeffs(self, epsilon):
        """Ascending coefficients of 2*epsilon - 2*V(z)."""
        c = -2.0 * np.asarray(self.coeffs, dtype=complex)
        c[0] += 2.0 * epsilon
        return c

    def dV_coeffs(self):
        return np.array([k * c for k, c in enumerate(self.coeffs)][1:],
                        dtype=complex)

    # -- landmarks ----------------------------------------------------------

    @property
    def n(self):
        """Degree of the polynomial."""
        return len(self.coeffs) - 1

    @property
    def is_harmonic(self):
        return all(c == 0.0 for c in self.coeffs[3:])

    @property
    def family_exponent(self):
        """n of the canonical family, or None for other polynomials."""
        n = self.n
        ref = np.zeros(n + 1)
        ref[2] = 0.5
        ref[n] = -1.0 / n
        return n if np.array_equal(np.asarray(self.coeffs), ref) else None

    def d2V(self, x):
        c2 = [k * (k - 1) * c for k, c in enumerate(self.coeffs)][2:]
        return float(poly_eval(c2, float(x)).real)

    def barrier_top(self):
        """Position of the barrier peak: smallest positive maximum of V."""
        if self.is_harmonic:
            raise DomainError("harmonic potential has no barrier")
        if self.family_exponent is not None:
            return 1.0
        dc = [k * c for k, c in enumerate(self.coeffs)][1:]
        roots = np.roots(dc[::-1])
        for r in sorted(r.real for r in roots
                        if abs(r.imag) < 1e-10 and r.real > 1e-12):
            if self.V(r).real > 0 and self.d2V(r) < 0:
                return float(r)
        raise DomainError("no positive barrier maximum found")

    def barrier_height(self):
        return float(self.V(self.barrier_top()).real)

    def barrier_exit(self):
        """The positive root b of V(b) = 0 beyond the barrier peak."""
        if self.is_harmonic:
            raise DomainError("harmonic potential never returns to V=0")
        n = self.family_exponent
        if n is not None:
            return float((n / 2.0) ** (1.0 / (n - 2)))
        xp = self.barrier_top()
        real = sorted(r.real for r in np.roots(np.asarray(self.coeffs)[::-1])
                      if abs(r.imag) < 1e-10 and r.real > xp)
        if not real:
            raise DomainError("potential has no exit point beyond the peak")
        return float(real[0])

    def nonlinear_scale(self, epsilon):
        """Radius below which the non-quadratic terms are negligible.

        (n |eps|)^(1/n) for a degree-n potential; infinite for the pure
        parabola. Satisfies sqrt(2|eps|) << r_nl for small |eps|, n >= 3.
        """
        if epsilon == 0:
            raise DomainError("nonlinear scale undefined at epsilon = 0")
        if self.is_harmonic:
            return np.inf
        return float((self.n * abs(epsilon)) ** (1.0 / self.n))

    # -- branch points of the velocity function -----------------------------

    def inner_branch_points(self, epsilon, seed=None):
        """The two zeros of 2*eps - 2*V(z) continuously connected to
        +/- sqrt(2*eps).

        Seeded by the first correction z = s*(1 + s^(n-2)/n) with
        s = +/- sqrt(2*eps), then refined by Newton to relative residual
        below 1e-12 (cap 50 iterations). Raises AmbiguousRoot when the
        refined pair collides with another root of the polynomial.
        """
        eps = complex(epsilon)
        if eps == 0:
            return 0.0j, 0.0j
        if not self.is_harmonic and abs(eps) >= self.barrier_height():
            raise DomainError("epsilon must lie below the barrier top")
        s = np.sqrt(2.0 * eps)
        if self.is_harmonic:
            return -s, s
        n = self.n
        if seed is None:
            seed = (-s * (1.0 + (-s) ** (n - 2) / n),
                    s * (1.0 + s ** (n - 2) / n))
        wc = self.w_coeffs(eps)
        dwc = np.array([k * c for k, c in enumerate(wc)][1:])
        scale = max(1.0, abs(eps))
        refined = []
        for z in seed:
            ok = False
            for _ in range(_NEWTON_CAP):
                f = poly_eval(wc, z)
                if abs(f) < 1e-12 * scale:
                    ok = True
                    break
                fp = poly_eval(dwc, z)
                if fp == 0:
                    break
                z = z - f / fp
            if not ok and abs(poly_eval(wc, z)) >= 1e-12 * scale:
                raise NoConvergence(
                    "branch point refinement stalled", best=z,
                    residual=abs(poly_eval(wc, z)))
            refined.append(z)
        zm, zp = refined
        width = abs(zp - zm)
        if width < 1e-10 * max(1.0, abs(zp)):
            raise AmbiguousRoot("seeds refined into the same root")
        others = self.outer_roots(eps, (zm, zp))
        if len(others):
            dmin = min(min(abs(o - zm), abs(o - zp)) for o in others)
            if dmin < 0.1 * max(abs(zp), abs(zm)):
                raise AmbiguousRoot(
                    f"inner pair not isolated: other root at {dmin:.3e}")
        return zm, zp

    def outer_roots(self, epsilon, inner_pair):
        """Roots of 2*eps - 2*V(z) other than the inner pair."""
        wc = self.w_coeffs(complex(epsilon))
        allr = np.roots(wc[::-1])
        zm, zp = inner_pair
        tol = 1e-5 * max(1.0, abs(zp), abs(zm))
        out = [r for r in allr
               if abs(r - zm) > tol and abs(r - zp) > tol]
        return np.array(out)


# -- zero-energy WKB quantities ---------------------------------------------


@dataclass(frozen=True)
class WkbBundle:
    """Barrier and rolldown actions plus the rolldown momentum."""

    S_E: float
    S_free: float
    b: float
    x: float
    y: float
    pot: Potential

    def p(self, y):
        """Momentum of the zero-energy rolldown, sqrt(-2V(y)), y >= b."""
        y = np.asarray(y, dtype=float)
        v = -2.0 * np.real(self.pot.V(y))
        if np.any(v < -1e-12):
            raise DomainError("momentum defined only where V <= 0")
        r = np.sqrt(np.maximum(v, 0.0))
        return r if r.ndim else float(r)


def _quad_zero_at_top(f, a, b):
    """Integral over [a, b] of f with a sqrt zero at b, via r = b - u^2."""
    val, _ = quad(lambda u: 2.0 * u * f(b - u * u), 0.0, np.sqrt(b - a),
                  limit=200, epsabs=1e-14, epsrel=1e-13)
    return val


def _quad_zero_at_bottom(f, a, b):
    """Integral over [a, b] of f with a sqrt zero at a, via r = a + u^2."""
    val, _ = quad(lambda u: 2.0 * u * f(a + u * u), 0.0, np.sqrt(b - a),
                  limit=200, epsabs=1e-14, epsrel=1e-13)
    return val


def euclidean_segment(pot, x1, x2):
    """int_x1^x2 sqrt(2V) dr for a segment inside the barrier."""
    b = pot.barrier_exit()
    if not (0 <= x1 <= x2 <= b):
        raise DomainError("need 0 <= x1 <= x2 <= b")
    if x1 == x2:
        return 0.0
    f = lambda r: np.sqrt(max(2.0 * pot.V(r).real, 0.0))
    if x2 == b:
        return _quad_zero_at_top(f, x1, b)
    val, _ = quad(f, x1, x2, limit=200, epsabs=1e-14, epsrel=1e-13)
    return val


def wkb_actions(pot, x, y):
    """Actions of the zero-energy tunneling path from x to y.

    S_E = int_x^b sqrt(2V) dr under the barrier and S_free =
    int_b^y sqrt(-2V) dr outside; both real and non-negative for
    0 <= x <= b <= y. The sqrt zero of either integrand at r = b is
    removed by the substitution r = b -/+ u^2.
    """
    b = pot.barrier_exit()
    if x > b or y < b:
        raise DomainError("need x <= b <= y")
    if x < 0:
        raise DomainError("need x >= 0")

    S_E = euclidean_segment(pot, x, b)
    if y > b:
        g = lambda r: np.sqrt(max(-2.0 * pot.V(r).real, 0.0))
        S_free = _quad_zero_at_bottom(g, b, y)
    else:
        S_free = 0.0

    return WkbBundle(S_E=float(S_E), S_free=float(S_free), b=b,
                     x=float(x), y=float(y), pot=pot)


def bounce_time(pot, r):
    """Time for the zero-energy bounce to roll from r up to the exit b.

    tau(r) = int_r^b dr' / sqrt(2V(r')); tau(b) = 0 and tau grows
    logarithmically as r -> 0. Defined for 0 < r <= b.
    """
    b = pot.barrier_exit()
    if not (0.0 < r <= b):
        raise DomainError("bounce profile needs 0 < r <= b")
    if r == b:
        return 0.0
    f = lambda rr: 1.0 / np.sqrt(max(2.0 * pot.V(rr).real, 1e-300))
    return _quad_zero_at_top(f, r, b)


def bounce_action_identity(pot, r_min, n_grid=4000):
    """Check S_E = int dtau (rdot^2/2 + V) along the bounce.

    On the bounce rdot^2 = 2V, so the integrand equals 2V(r(tau)). The
    tau parameterization is built on a u grid with r = b - u^2, where
    dtau = 2u du / sqrt(2V) stays finite at the top. Returns the tau
    integral and the direct sqrt(2V) quadrature over the same range.
    """
    b = pot.barrier_exit()
    if not (0.0 < r_min < b):
        raise DomainError("need 0 < r_min < b")
    u = np.linspace(0.0, np.sqrt(b - r_min), n_grid)
    r = b - u * u
    twoV = 2.0 * np.real(pot.V(r))
    twoV[0] = 0.0
    dtau_du = np.empty_like(u)
    dtau_du[1:] = 2.0 * u[1:] / np.sqrt(np.maximum(twoV[1:], 1e-300))
    # at the top 2V ~ 2|V'(b)| u^2, so dtau/du -> 2/sqrt(2|V'(b)|)
    dtau_du[0] = 2.0 / np.sqrt(2.0 * abs(pot.dV(b).real))
    tau = np.concatenate(([0.0], np.cumsum(
        0.5 * (dtau_du[1:] + dtau_du[:-1]) * np.diff(u))))
    S_tau = float(np.trapezoid(twoV, tau))
    S_dir = euclidean_segment(pot, r_min, b)
    return S_tau, S_dir
