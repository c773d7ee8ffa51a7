"""Saddle action by independent routes and its small-energy structure.

Three evaluations of the same S(x, y; t):
  direct   - Lagrangian time quadrature along the integrated path,
  contour  - N windings of the cycle integral plus the real-line piece
             minus eps t,
  expansion- the small-eps asymptotic around the zero-energy value.
The direct and contour routes share no machinery, so their agreement is
a real check of both the trajectory and the branch-tracked quadratures.
"""

import math
from dataclasses import dataclass
from typing import Optional

from .contour import cycle_integrals, real_line_S
from .errors import DomainError, PhaseConstraintViolated
from .potential import euclidean_segment
from .saddle import SaddleSolution, _shoot
from .trajectory import Trajectory


def action_direct(traj):
    """Time integral of the Lagrangian v^2/2 - V(z) along the path.

    Accumulated inside the integrator step loop, so it carries the same
    adaptive accuracy as the path itself.
    """
    if len(traj.action) == 0:
        return 0.0 + 0.0j
    return complex(traj.action[-1])


def action_expansion(pot, x, y, epsilon):
    """S0 + (1/2 - 1/n) eps^(n/2) ln|eps| / Im eps^(n/2-1).

    The zero-energy value plus the leading finite-energy correction;
    higher powers of eps are dropped.
    """
    eps = complex(epsilon)
    n = pot.n
    ph = eps ** (n / 2.0 - 1.0)
    if abs(ph.imag) < 1e-12 * abs(ph):
        raise PhaseConstraintViolated("Im eps^(n/2-1) = 0")
    S0 = real_line_S(pot, x, y, 0.0)
    corr = (0.5 - 1.0 / n) * eps ** (n / 2.0) * math.log(abs(eps)) / ph.imag
    return S0 + corr


@dataclass(frozen=True)
class ActionBreakdown:
    """All action routes for one saddle, with the assembly pieces."""

    S_direct: complex
    I_zc: complex
    S_line: complex
    eps_t: complex
    S_contour: complex
    S_expansion: complex
    S_E: float
    S_free: float
    S_shortcut: complex
    shortcut_agreement: float
    endpoint_shift: complex
    epsilon: complex
    N: int
    t: float
    x: float
    y: float

    def as_dict(self):
        c = lambda z: [z.real, z.imag]
        return {"S_direct": c(self.S_direct), "I_zc": c(self.I_zc),
                "S_line": c(self.S_line), "eps_t": c(self.eps_t),
                "S_contour": c(self.S_contour),
                "S_expansion": c(self.S_expansion),
                "S_E": self.S_E, "S_free": self.S_free,
                "S_shortcut": c(self.S_shortcut),
                "shortcut_agreement": self.shortcut_agreement,
                "endpoint_shift": c(self.endpoint_shift),
                "epsilon": c(self.epsilon), "N": self.N, "t": self.t,
                "x": self.x, "y": self.y}


def action_decomposed(pot, saddle, trajectory=None, ode_rtol=1e-12):
    """Assemble every route for a converged saddle.

    The direct route integrates the Lagrangian along the shooting
    trajectory and refers its endpoint to y exactly through the
    first-order shift v_end (y - z_end); the shift is reported. The
    shortcut S = (1 - eps d/deps)(N I + S_line) takes the derivative by
    central differences along the fixed-phase ray through eps.
    """
    eps = complex(saddle.epsilon)
    N, t = saddle.N, saddle.t
    x, y = saddle.x, saddle.y

    cyc = cycle_integrals(pot, eps)
    S_line = real_line_S(pot, x, y, eps)
    S_contour = N * cyc.I + S_line - eps * t

    u = eps / abs(eps)
    h = 1e-4 * abs(eps)

    def F(e):
        return N * cycle_integrals(pot, e).I + real_line_S(pot, x, y, e)

    dF = (F(eps + h * u) - F(eps - h * u)) / (2 * h * u)
    S_shortcut = (N * cyc.I + S_line) - eps * dF
    agree = abs(S_shortcut - S_contour) / abs(S_contour)

    traj = trajectory if trajectory is not None else saddle.verification
    if traj is None:
        traj = _shoot(pot, x, y, eps, t, ode_rtol, events=False)
    shift = traj.v[-1] * (y - traj.z[-1])
    S_direct = action_direct(traj) + shift

    S_expansion = action_expansion(pot, x, y, eps)

    iS = 1j * S_contour
    return ActionBreakdown(
        S_direct=S_direct, I_zc=cyc.I, S_line=S_line, eps_t=eps * t,
        S_contour=S_contour, S_expansion=S_expansion,
        S_E=-iS.real, S_free=iS.imag, S_shortcut=S_shortcut,
        shortcut_agreement=agree, endpoint_shift=shift,
        epsilon=eps, N=N, t=t, x=x, y=y)


def factorize(breakdown):
    """(S_E, S_free) = (-Re iS, Im iS) of the contour action."""
    iS = 1j * breakdown.S_contour
    return -iS.real, iS.imag


def false_vacuum_compensation(pot, x):
    """x^2/2 + barrier integral from x: stationary in x near the well.

    The Gaussian weight of the false-vacuum state cancels the
    x-dependence of the Euclidean action to first order, which is why
    the start point of the saddle can be taken at the origin.
    """
    b = pot.barrier_exit()
    if not 0 <= x < b:
        raise DomainError("x must sit inside the barrier")
    return x * x / 2.0 + euclidean_segment(pot, x, b)
