"""Jacobi elliptic functions for complex argument and parameter.

sn/cn/dn are built by a descending Landen recursion: the modulus is
driven toward zero, the base level is evaluated with circular
functions, and the Gauss ascending transformation maps back level by
level. For the moduli used here (|m| well below 1) the recursion
contracts quadratically and five or six levels reach 1e-15.

Also provides the closed-form quartic-well reference orbit
z(t) = -A sn(B t | q) with A = sqrt(2q/(1+q)), B = 1/sqrt(1+q),
used as an independent cross-check of the ODE integrator. Its
conserved energy is measured, not assumed; callers can compare it
against candidate formulas in q.
"""

import numpy as np

from .errors import DomainError, ModulusOutOfRange


def sn_cn_dn(u, m, tol=1e-14, max_levels=32):
    """Jacobi sn, cn, dn of complex argument u with parameter m (= k^2).

    Raises ModulusOutOfRange if the Landen sequence fails to contract,
    which happens for parameters near or beyond the |m| ~ 1 region.
    """
    k = np.sqrt(complex(m))
    ks = [k]
    us = [np.asarray(u, dtype=complex)]
    for _ in range(max_levels):
        if abs(ks[-1]) < tol:
            break
        kp = np.sqrt(1.0 - ks[-1] ** 2)
        k1 = (1.0 - kp) / (1.0 + kp)
        if abs(k1) >= abs(ks[-1]):
            raise ModulusOutOfRange(
                f"Landen recursion does not contract for m = {m!r}")
        ks.append(k1)
        us.append(us[-1] / (1.0 + k1))
    else:
        raise ModulusOutOfRange(
            f"Landen recursion exceeded {max_levels} levels for m = {m!r}")
    s = np.sin(us[-1])
    c = np.cos(us[-1])
    d = np.ones_like(s)
    for i in range(len(ks) - 1, 0, -1):
        k1 = ks[i]
        den = 1.0 + k1 * s * s
        s, c, d = (1.0 + k1) * s / den, c * d / den, (1.0 - k1 * s * s) / den
    if s.ndim:
        return s, c, d
    return complex(s), complex(c), complex(d)


def sn(u, m):
    return sn_cn_dn(u, m)[0]


class JacobiReference:
    """Closed-form quartic-well orbit z(t) = -A sn(t/sqrt(1+q) | q).

    Valid for the n = 4 member of the potential family only. The
    conserved energy is measured from the orbit itself at construction
    (energy()) rather than taken from any closed-form expression in q.
    """

    def __init__(self, q):
        self.q = complex(q)
        if self.q == -1:
            raise DomainError("q = -1 is singular for this parameterization")
        self.A = np.sqrt(2.0 * self.q / (1.0 + self.q))
        self.B = 1.0 / np.sqrt(1.0 + self.q)
        # probe contraction once up front so failures surface early
        sn_cn_dn(0.0, self.q)

    def z(self, t):
        s = sn(self.B * np.asarray(t, dtype=complex), self.q)
        return -self.A * s

    def v(self, t):
        _, c, d = sn_cn_dn(self.B * np.asarray(t, dtype=complex), self.q)
        return -self.A * self.B * c * d

    @property
    def v0(self):
        """Initial velocity -A*B; fixes the sqrt branch for comparisons."""
        return -self.A * self.B

    def energy(self, t_samples=None):
        """Measured conserved energy v^2/2 + V(z), with V the n=4 member.

        Returns (mean, spread) over the sample times.
        """
        if t_samples is None:
            t_samples = np.linspace(0.0, 50.0, 101)
        z = self.z(t_samples)
        v = self.v(t_samples)
        e = v * v / 2.0 + z * z / 2.0 - z ** 4 / 4.0
        mean = complex(e.mean())
        spread = float(np.abs(e - mean).max())
        return mean, spread

    def candidate_energy_formulas(self):
        """Two closed-form candidates for eps(q), for comparison only."""
        q = self.q
        return {"q/(1+q)^2": q / (1.0 + q) ** 2,
                "q/(1+q^2)": q / (1.0 + q * q)}
