"""Shared fixtures; the expensive solves run once per session."""

import numpy as np
import pytest

from tunnelsaddle import (
    Potential,
    action_decomposed,
    default_grid,
    evolve,
    extract_log_coefficient,
    fit_gamma,
    gamma_sweep,
    relax_initial_state,
    solve_saddle,
)

TAU = 2.0 * np.pi
TGRID = (200, 350, 500, 1000, 2000)
RAY_MODULI = np.geomspace(1e-4, 3e-3, 12)
X_FAR = 10.0 * np.sqrt(2.0e-3)


@pytest.fixture(scope="session")
def quartic():
    return Potential.well(4)


@pytest.fixture(scope="session")
def canonical_saddle(quartic):
    # x=0 -> y=2 in 733 cycles; the workhorse saddle of the suite
    return solve_saddle(quartic, 0.0, 2.0, 733 * TAU, seed=1e-3j)


@pytest.fixture(scope="session")
def canonical_breakdown(quartic, canonical_saddle):
    return action_decomposed(quartic, canonical_saddle)


@pytest.fixture(scope="session")
def far_saddle(quartic):
    # y=10 exposes a long outgoing branch for the tail diagnostics
    return solve_saddle(quartic, 0.0, 10.0, 150 * TAU)


@pytest.fixture(scope="session")
def tgrid_saddles(quartic):
    return {nt: solve_saddle(quartic, 0.0, 2.0, nt * TAU) for nt in TGRID}


@pytest.fixture(scope="session")
def tgrid_breakdowns(quartic, tgrid_saddles):
    return {nt: action_decomposed(quartic, sad)
            for nt, sad in tgrid_saddles.items()}


@pytest.fixture(scope="session")
def series_origin(quartic):
    return extract_log_coefficient(quartic, 0.0, 2.0, 1j * RAY_MODULI)


@pytest.fixture(scope="session")
def series_far(quartic):
    return extract_log_coefficient(quartic, X_FAR, 2.0, 1j * RAY_MODULI)


@pytest.fixture(scope="session")
def hbar12_run(quartic):
    grid = default_grid(quartic, 0.12)
    psi = relax_initial_state(grid, quartic)
    return evolve(grid, psi, quartic, 60.0, probes=(2.0, 2.35))


@pytest.fixture(scope="session")
def hbar100_fit(quartic):
    # regime-boundary probe: hbar_eff comparable to the barrier height
    grid = default_grid(quartic, 1.0)
    psi = relax_initial_state(grid, quartic)
    run = evolve(grid, psi, quartic, 60.0, probes=(2.0, 2.35))
    return fit_gamma(run, 2.0)


@pytest.fixture(scope="session")
def oracle_sweep(quartic):
    return gamma_sweep(quartic)
