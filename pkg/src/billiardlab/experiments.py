"""High-level experiment drivers.

Each driver wires together geometry, discretization, eigensolve, and the
diagnostic modules for one of the standard experiments (edge-mass scan on the
stadium, obstacle-annulus scan on the Sinai billiard, per-mode control
constants, Husimi shell statistics, ray control checks).  The CLI, the
verification suites, the test suite, and the scripts all run through these,
so a result quoted anywhere is reproducible from one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import control, discretize, eigensolve, geometry, modes, phase, rays

__all__ = [
    "SolveResult",
    "solve_domain",
    "stadium_edge_experiment",
    "sinai_annulus_experiment",
    "mode_control_experiment",
    "husimi_shell_experiment",
    "corridor_ray_experiment",
    "irrational_hitting_experiment",
    "reversibility_error",
]


@dataclass
class SolveResult:
    domain: object
    grid: object
    op: object
    pairs: list


def solve_domain(domain, resolution, count, target=0.0, tol=1e-8, seed=0):
    """Build the grid and operator for a domain and solve an eigen-window."""
    grid = discretize.build_grid(domain, resolution)
    op = discretize.assemble_laplacian(domain, grid)
    pairs = eigensolve.solve_window(op, target, count, tol=tol, seed=seed)
    return SolveResult(domain=domain, grid=grid, op=op, pairs=pairs)


def stadium_edge_experiment(resolution, count, delta=0.15, a=1.0, seed=0, solve=None):
    """Edge-mass scan for the stadium: mass near gamma1 vs mass in R."""
    domain = geometry.Stadium(a=a)
    if solve is None:
        solve = solve_domain(domain, resolution, count, seed=seed)
    report = control.edge_mass_scan(solve.domain, solve.grid, solve.pairs, delta=delta)
    return solve, report


def sinai_annulus_experiment(resolution, count, width=0.1, radius=0.25, seed=0, solve=None):
    """Obstacle-annulus mass scan for the Sinai billiard."""
    domain = geometry.TorusMinusObstacle(geometry.Disc((0.5, 0.5), radius))
    if solve is None:
        solve = solve_domain(domain, resolution, count, seed=seed)
    report = control.obstacle_mass_scan(solve.domain, solve.grid, solve.pairs, width=width)
    return solve, report


def mode_control_experiment(
    k_max=64, a=1.0, z_range=(0.0, 500.0), omega=(0.2, 0.4), samples=6, seed=0
):
    """Per-mode control constants C(k), k = 1..k_max."""
    tables = []
    for k in range(1, k_max + 1):
        tables.append(
            modes.mode_control_constant(k, a, z_range, omega, samples=samples, seed=seed)
        )
    c_values = np.array([t.c_of_k for t in tables])
    return tables, c_values


def husimi_shell_experiment(solve, n_group=20, band=(0.8, 1.2), n_x0=(16, 16)):
    """Husimi shell masses for the lowest and highest mode groups of a solve.

    Returns (low_masses, high_masses) for the n_group lowest/highest
    eigenvalues in the solve (Sinai fields are zero-extended to the torus).
    """
    grid = solve.grid
    if not (grid.periodic_x and grid.periodic_y):
        raise phase.PhaseError("husimi experiment expects a periodic (torus) grid")
    box = (1.0, 1.0)
    pairs = solve.pairs
    lows = pairs[:n_group]
    highs = pairs[-n_group:]

    def masses(group):
        out = []
        for p in group:
            if p.lam <= 0:
                continue
            u = grid.field_from_vector(np.asarray(p.vec))
            u = phase.normalize_field(u, box)
            H = phase.husimi(u, p.lam, box, n_x0=n_x0, xi_max=2.0)
            out.append(phase.shell_mass(H, band))
        return np.array(out)

    return masses(lows), masses(highs)


def corridor_ray_experiment(domain, direction, seed_point, T=100.0):
    """Trajectories seeded inside the maximal corridor never hit the obstacle.

    Returns (corridor, obstacle_event_count) for a trajectory started at the
    corridor seed in its rational direction.
    """
    corridor = geometry.maximal_rectangle(domain, direction, seed_point)
    traj = rays.evolve(domain, seed_point, corridor.unit_dir, T)
    n_obstacle = sum(1 for e in traj.events if e.kind == "obstacle")
    return corridor, n_obstacle


def irrational_hitting_experiment(domain, region, n_seeds=100, T_max=50.0, seed=0):
    """Hitting times into ``region`` along the (1, golden-ratio) direction.

    Returns the array of hitting times (NaN where the region was not reached
    within T_max) for n_seeds deterministically scattered interior starts.
    """
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    d = (1.0, phi)
    rng = np.random.default_rng(seed)
    times = []
    found = 0
    while found < n_seeds:
        p = tuple(rng.random(2))
        if not bool(domain.contains(*p)):
            continue
        found += 1
        t = rays.hitting_time(domain, p, d, region, T_max)
        times.append(math.nan if t is None else t)
    return np.array(times)


def reversibility_error(domain, start, direction, T):
    """Round-trip error of evolving T, reversing, and evolving T again."""
    fwd = rays.evolve(domain, start, direction, T)
    end = fwd.position(T)
    dend = fwd.direction_at(T)
    back = rays.evolve(domain, end, (-dend[0], -dend[1]), T)
    ret = back.position(T)
    if getattr(domain, "periodic", (False, False))[0]:
        dx = (ret[0] - start[0] + 0.5) % 1.0 - 0.5
        dy = (ret[1] - start[1] + 0.5) % 1.0 - 0.5
    else:
        dx = ret[0] - start[0]
        dy = ret[1] - start[1]
    return math.hypot(dx, dy)
