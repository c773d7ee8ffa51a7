"""Direct quantum evolution used to measure the decay rate.

A wave packet prepared in the harmonic neck of the well leaks through
the barrier; the leakage rate is read off the probability current at
probes beyond the exit. The potential seen by the grid is one-sided:
for x < 0 the quadratic neck continues unchanged (no second barrier,
so the decay goes right only), the true well acts on 0 <= x <= 3 b,
and beyond 3 b a straight line with matched value and slope keeps the
downhill drop bounded. A quadratic imaginary ramp on the outer 20% of
the domain absorbs whatever reaches the edge.

Time stepping is Crank-Nicolson: unconditionally stable, norm
preserving up to absorber losses, and tridiagonal, so each step is a
single Thomas solve. The semiclassical knob hbar_eff enters as
i hbar dpsi/dt = (-hbar^2/2 d^2/dx^2 + V - iW) psi, and the decay
exponent scales as exp(-2 S_E / hbar_eff).
"""

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import kernels
from .errors import CFLQualityWarning, DomainError, NoExponentialWindow

ABSORBER_FRACTION = 0.2
CAP_EXIT_MULTIPLE = 3.0


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid and step for one evolution run."""

    x_min: float
    x_max: float
    dx: float
    dt: float
    hbar_eff: float

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0 or self.hbar_eff <= 0:
            raise DomainError("dx, dt and hbar_eff must be positive")
        if self.x_max - self.x_min < 10 * self.dx:
            raise DomainError("domain too short for its spacing")

    @property
    def x(self):
        """Interior points; the wave function vanishes at both walls."""
        n = int(round((self.x_max - self.x_min) / self.dx)) - 1
        return self.x_min + self.dx * np.arange(1, n + 1)

    @property
    def absorber_start(self):
        return self.x_max - ABSORBER_FRACTION * (self.x_max - self.x_min)


def resolved_potential(pot, x):
    """Potential samples the grid actually evolves under.

    Harmonic wells pass through unchanged. Otherwise the neck parabola
    replaces V on x < 0, V itself acts up to 3 b, and a tangent line
    continues beyond, keeping |V| bounded on the grid.
    """
    x = np.asarray(x, dtype=float)
    if pot.is_harmonic:
        return 0.5 * x * x
    xc = CAP_EXIT_MULTIPLE * pot.barrier_exit()
    vc = float(np.real(pot.V(xc)))
    dvc = float(np.real(pot.dV(xc)))
    inner = np.real(pot.V(np.minimum(x, xc)))
    out = np.where(x < 0.0, 0.5 * x * x, inner)
    return np.where(x > xc, vc + dvc * (x - xc), out)


def absorber_profile(grid, strength=12.0):
    """Quadratic imaginary ramp W(x) on the outer right 20%."""
    x = grid.x
    xa = grid.absorber_start
    ramp = np.clip((x - xa) / (grid.x_max - xa), 0.0, None)
    return strength * ramp * ramp


def default_grid(pot, hbar_eff, x_min=-6.0, x_max=6.0, points_per_wave=28,
                 quality=0.4):
    """Grid resolving the local wavelength at the absorber edge.

    dx comes from the semiclassical wavelength 2 pi hbar / p at the
    start of the absorber (the fastest unabsorbed wave); dt from the
    step-quality bound dt max|V| / hbar <= quality.
    """
    xa = x_max - ABSORBER_FRACTION * (x_max - x_min)
    v_abs = float(resolved_potential(pot, np.array([xa]))[0])
    p = math.sqrt(2.0 * max(abs(v_abs), hbar_eff))
    dx = min(2.0 * math.pi * hbar_eff / p / points_per_wave, 0.01)
    probe = np.linspace(x_min, x_max, 4097)
    vmax = float(np.abs(resolved_potential(pot, probe)).max())
    dt = quality * hbar_eff / max(vmax, 1.0)
    return GridSpec(x_min=x_min, x_max=x_max, dx=dx, dt=dt,
                    hbar_eff=hbar_eff)


def prepare_initial_state(grid):
    """Ground-state Gaussian of the neck parabola, width sqrt(hbar)."""
    x = grid.x
    psi = np.exp(-x * x / (2.0 * grid.hbar_eff)).astype(np.complex128)
    norm = math.sqrt(float(np.sum(np.abs(psi) ** 2)) * grid.dx)
    return psi / norm


def relax_initial_state(grid, pot, tau=10.0, dtau=0.02, psi0=None):
    """Imaginary-time projection onto the metastable well mode.

    The neck Gaussian overlaps excited well states at the 1e-5 level,
    and those drain orders of magnitude faster than the ground mode,
    polluting the probe current for a long time. Evolving
    exp(-tau H_conf / hbar) under a confined copy of the potential
    (flat beyond the barrier top, so nothing escapes downhill) kills
    the excited amplitudes like exp(-2 tau) while the target mode
    merely rescales. Returns the renormalized state.
    """
    x = grid.x
    if pot.is_harmonic:
        v = 0.5 * x * x
    else:
        xp = pot.barrier_top()
        vtop = float(np.real(pot.V(xp)))
        v = np.where(x < 0.0, 0.5 * x * x,
                     np.where(x <= xp, np.real(pot.V(x)), vtop))
    h = grid.hbar_eff
    r = 0.5 * dtau / h
    off = -0.5 * h * h / grid.dx ** 2
    n = len(x)
    diag_h = h * h / grid.dx ** 2 + v
    Ad = (1.0 + r * diag_h).astype(np.complex128)
    Bd = (1.0 - r * diag_h).astype(np.complex128)
    Au = np.full(n, r * off, dtype=np.complex128)
    Bu = np.full(n, -r * off, dtype=np.complex128)

    psi = np.array(psi0 if psi0 is not None
                   else prepare_initial_state(grid), dtype=np.complex128)
    nsteps = max(int(math.ceil(tau / dtau)), 1)
    unused = np.empty((1, 5))
    kernels.cn_evolve(Au.copy(), Ad, Au, Bu.copy(), Bd, Bu, psi,
                      nsteps, nsteps + 1, grid.dx, h, 1, 2, unused)
    norm = math.sqrt(float(np.sum(np.abs(psi) ** 2)) * grid.dx)
    return psi / norm


def hamiltonian_expectation(grid, psi, v):
    """<psi|H|psi> with the same stencil the stepper uses."""
    h = grid.hbar_eff
    lap = np.zeros_like(psi)
    lap[1:-1] = psi[:-2] - 2.0 * psi[1:-1] + psi[2:]
    lap[0] = psi[1] - 2.0 * psi[0]
    lap[-1] = psi[-2] - 2.0 * psi[-1]
    hpsi = -0.5 * h * h * lap / grid.dx ** 2 + v * psi
    return float(np.real(np.sum(np.conj(psi) * hpsi)) * grid.dx)


def probability_current(psi, y, grid):
    """hbar Im(psi* dpsi/dx) at the grid point nearest y."""
    k = int(np.argmin(np.abs(grid.x - y)))
    if k < 1 or k > len(psi) - 2:
        raise DomainError("probe too close to the domain wall")
    grad = (psi[k + 1] - psi[k - 1]) / (2.0 * grid.dx)
    return float(grid.hbar_eff * (np.conj(psi[k]) * grad).imag)


@dataclass(frozen=True)
class EvolutionRecord:
    """Time series and snapshots from one Crank-Nicolson run."""

    grid: GridSpec
    probes: tuple
    t: np.ndarray
    p_below: np.ndarray     # columns: probe 1, probe 2
    current: np.ndarray     # columns: probe 1, probe 2
    norm: np.ndarray
    psi: np.ndarray
    snapshots: list
    potential: np.ndarray
    absorber: np.ndarray
    step_quality: float


def evolve(grid, psi0, pot, t_final, probes=(2.0, 2.35),
           absorber_strength=12.0, record_every=None, n_snapshots=8):
    """Run Crank-Nicolson to t_final and record the probe series.

    Probes must sit beyond the barrier exit and before the absorber.
    absorber_strength=0 switches the ramp off (unitary evolution, for
    convergence checks). Emits CFLQualityWarning when dt max|V|/hbar
    exceeds 0.5; the step stays stable, only accuracy degrades.
    """
    x = grid.x
    v = resolved_potential(pot, x)
    w = absorber_profile(grid, absorber_strength) if absorber_strength \
        else np.zeros_like(x)

    y1, y2 = sorted(probes)
    if not pot.is_harmonic:
        b = pot.barrier_exit()
        if y1 <= b:
            raise DomainError("probes must lie beyond the barrier exit")
        if absorber_strength and y2 >= grid.absorber_start:
            raise DomainError("probes must precede the absorber")
    idx1 = int(np.argmin(np.abs(x - y1)))
    idx2 = int(np.argmin(np.abs(x - y2)))

    h = grid.hbar_eff
    quality = grid.dt * float(np.abs(v).max()) / h
    if quality > 0.5:
        warnings.warn(f"dt max|V|/hbar = {quality:.2f} exceeds 0.5",
                      CFLQualityWarning, stacklevel=2)

    # Crank-Nicolson bands: (1 + i dt H / 2 hbar) psi' = (1 - ...) psi
    r = 0.5j * grid.dt / h
    off = -0.5 * h * h / grid.dx ** 2
    n = len(x)
    diag_h = h * h / grid.dx ** 2 + v - 1j * w
    Ad = 1.0 + r * diag_h
    Bd = 1.0 - r * diag_h
    Au = np.full(n, r * off, dtype=np.complex128)
    Al = Au.copy()
    Bu = np.full(n, -r * off, dtype=np.complex128)
    Bl = Bu.copy()

    nsteps = max(int(math.ceil(t_final / grid.dt)), 1)
    if record_every is None:
        record_every = max(nsteps // 2000, 1)
    rec = int(record_every)

    psi = np.array(psi0, dtype=np.complex128)
    if len(psi) != n:
        raise DomainError("psi0 does not match the grid")

    # chunk boundaries double as snapshot times; chunks stay multiples
    # of rec so the recording phase never resets mid-series
    per_chunk = max(int(math.ceil(nsteps / max(n_snapshots, 1) / rec)), 1)
    rows_total = nsteps // rec + n_snapshots + 2
    out = np.empty((rows_total, 5))
    row = 0
    done = 0
    snaps = []
    while done < nsteps:
        chunk = min(per_chunk * rec, nsteps - done)
        used = kernels.cn_evolve(Al, Ad, Au, Bl, Bd, Bu, psi,
                                 chunk, rec, grid.dx, h, idx1, idx2,
                                 out[row:])
        row += used
        done += chunk
        snaps.append((done * grid.dt, psi.copy()))
    out = out[:row]
    t = grid.dt * rec * np.arange(1, row + 1)

    return EvolutionRecord(
        grid=grid, probes=(float(x[idx1]), float(x[idx2])), t=t,
        p_below=out[:, 0:2].copy(), current=out[:, 2:4].copy(),
        norm=out[:, 4].copy(), psi=psi, snapshots=snaps, potential=v,
        absorber=w, step_quality=quality)


@dataclass(frozen=True)
class DecayFit:
    """Fitted escape rate at one probe."""

    gamma: float
    fit_window: tuple
    r_squared: float
    method: str

    def __post_init__(self):
        if not self.gamma > 0:
            raise NoExponentialWindow("fitted rate is not positive")


def _decay_window(t, p, j):
    """Late window where ln P is linear to r^2 >= 0.99.

    Candidate windows start at increasing fractions of the run (the
    earlier, the longer the lever arm) and all end where depletion
    would bite, P < P[0]/2. The candidate with the best r^2 wins,
    provided it clears 0.99 and actually decays.
    """
    alive = p > 0.5 * p[0]
    stop = int(np.argmin(alive)) if not alive.all() else len(p)
    if stop < 16:
        raise NoExponentialWindow("well depleted before any fit window")
    best = None
    logp = np.log(p[:stop])
    for frac in (0.15, 0.25, 0.35, 0.5, 0.65):
        k = int(frac * stop)
        if stop - k < 12:
            continue
        tt, yy = t[k:stop], logp[k:stop]
        slope, icpt = np.polyfit(tt, yy, 1)
        resid = yy - (slope * tt + icpt)
        ss_tot = float(np.sum((yy - yy.mean()) ** 2))
        if ss_tot == 0.0:
            continue
        r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot
        if slope < 0 and (best is None or r2 > best[1]):
            best = (slice(k, stop), r2, -slope)
    if best is None or best[1] < 0.99:
        raise NoExponentialWindow("no window with r^2 >= 0.99 and decay")
    return best


def fit_gamma(run, probe, method="flux"):
    """Escape rate at a probe from one recorded evolution.

    method="flux" averages j(y,t)/P_below(y,t) over the clean decay
    window; method="population" takes -d ln P / dt over the same
    window. Both share the window and its r^2 diagnostic.
    """
    dist = [abs(probe - q) for q in run.probes]
    col = int(np.argmin(dist))
    if dist[col] > 0.1:
        raise DomainError(f"probe {probe} was not recorded "
                          f"(available: {run.probes})")
    p = run.p_below[:, col]
    j = run.current[:, col]
    win, r2, gamma_pop = _decay_window(run.t, p, j)
    window = (float(run.t[win][0]), float(run.t[win][-1]))
    if method == "population":
        return DecayFit(gamma=gamma_pop, fit_window=window,
                        r_squared=r2, method=method)
    if method != "flux":
        raise DomainError(f"unknown fit method {method!r}")
    gamma = float(np.mean(j[win] / p[win]))
    return DecayFit(gamma=gamma, fit_window=window, r_squared=r2,
                    method=method)


@dataclass(frozen=True)
class SweepResult:
    """ln Gamma vs 1/hbar across a semiclassical sweep."""

    hbars: tuple
    gammas: tuple
    fits: tuple
    slope: float
    intercept: float

    def gamma_at(self, hbar):
        return self.gammas[self.hbars.index(hbar)]


def gamma_sweep(pot, hbars=(0.06, 0.08, 0.10, 0.12, 0.15), probe=2.0,
                probe2=2.35, t_final=60.0, method="flux", workers=None,
                grid_factory=default_grid, relax=True):
    """Measure Gamma(hbar_eff) and fit the exponent slope.

    Each hbar owns its grid and runs on its own thread. relax=True
    (default) projects the start state onto the metastable mode first;
    without it the excited-state drain washes out the small-hbar rates.
    Returns a SweepResult whose slope estimates d ln Gamma / d (1/hbar),
    to be compared with -2 S_E.
    """
    hbars = tuple(float(h) for h in hbars)
    if len(hbars) < 2:
        raise DomainError("sweep needs at least two hbar values")

    def one(hbar):
        grid = grid_factory(pot, hbar)
        psi0 = prepare_initial_state(grid)
        if relax:
            psi0 = relax_initial_state(grid, pot, psi0=psi0)
        run = evolve(grid, psi0, pot, t_final, probes=(probe, probe2))
        return fit_gamma(run, probe, method=method)

    with ThreadPoolExecutor(max_workers=workers or len(hbars)) as pool:
        fits = tuple(pool.map(one, hbars))
    gammas = tuple(f.gamma for f in fits)
    slope, intercept = np.polyfit(1.0 / np.asarray(hbars),
                                  np.log(gammas), 1)
    return SweepResult(hbars=hbars, gammas=gammas, fits=fits,
                       slope=float(slope), intercept=float(intercept))
