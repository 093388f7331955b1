"""Self-verification suites behind ``billiardlab verify``.

Three suites of named checks, each recording expected/actual/tolerance:

* ``unit``     -- fast closed-form and invariant checks (< 60 s).
* ``oracle``   -- brute-force-oracle cross checks: the sparse window solver
                  against the in-repo dense eigendecomposition, staircase
                  region areas against fine quadrature, corridor widths
                  against inflation search, 1D mode solves against a dense
                  solve.
* ``theorems`` -- the full-scale scan criteria (stadium edge scan, Sinai
                  annulus scan + heatmap amplitudes, control-constant
                  uniformity, Husimi shell trend, ray controls, CSV
                  determinism).  Long-running.

The pytest acceptance module runs the same criteria; this runner exists so a
deployment can verify itself without a test harness.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import control, discretize, eigensolve, experiments, geometry, modes, phase

__all__ = ["Check", "run_suite", "SUITES"]


@dataclass
class Check:
    name: str
    passed: bool
    expected: str
    actual: str
    tol: str


def _chk(name, passed, expected, actual, tol=""):
    return Check(name, bool(passed), str(expected), str(actual), str(tol))


def _square_closed_form(resolution):
    h = 1.0 / (resolution + 1)
    s = (4.0 / h**2) * np.sin(np.arange(1, resolution + 1) * math.pi * h / 2.0) ** 2
    return np.sort((s[:, None] + s[None, :]).ravel())


# ---------------------------------------------------------------------------
# unit suite
# ---------------------------------------------------------------------------


def _unit_suite():
    checks = []

    res = 20
    grid = discretize.build_grid(geometry.Rectangle(), res)
    op = discretize.assemble_laplacian(geometry.Rectangle(), grid)
    got = np.array([p.lam for p in eigensolve.dense_oracle(op, compute_vectors=False)])
    exact = _square_closed_form(res)
    err = float(np.max(np.abs(got - exact) / exact))
    checks.append(_chk("square_spectrum_closed_form_res20", err <= 1e-10, 0.0, err, 1e-10))

    A = op.to_dense()
    mid = grid.index[res // 2, res // 2]
    row = A[mid]
    diag_ok = abs(row[mid] - 4.0 / grid.h**2) < 1e-9
    off = np.sort(row[row != 0])
    stencil_ok = diag_ok and len(off) == 5 and np.allclose(off[:4], -1.0 / grid.h**2)
    checks.append(_chk("five_point_stencil_row", stencil_ok, "4/h^2 and -1/h^2", "ok" if stencil_ok else "bad"))

    dom_t = geometry.TorusMinusObstacle(obstacle=None)
    grid_t = discretize.build_grid(dom_t, 16)
    op_t = discretize.assemble_laplacian(dom_t, grid_t)
    z = float(np.max(np.abs(op_t.matvec(np.ones(op_t.n)))))
    checks.append(_chk("torus_constant_kernel", z <= 1e-9, 0.0, z, 1e-9))

    rng = np.random.default_rng(0)
    u = rng.standard_normal((40, 30))
    dec = modes.decompose(u, 1.0, 30)
    # sum_k ||u_k||^2 = ||u||^2: with the common h_x this is
    # sum coeffs^2 = h_y * sum u^2, h_y = 1/(ny+1)
    rhs = float(np.sum(u**2)) / 31.0
    par = abs(float(np.sum(dec.coefficients**2)) - rhs) / rhs
    checks.append(_chk("mode_decompose_parseval", par <= 1e-10, 0.0, par, 1e-10))

    ys = np.linspace(0, 1, 514)[1:-1]
    E = np.stack([modes.dirichlet_basis(k, 1.0, ys) for k in range(1, 6)])
    G = (E @ E.T) * (ys[1] - ys[0])
    dev = float(np.abs(G - np.eye(5)).max())
    checks.append(_chk("dirichlet_basis_orthonormal", dev <= 1e-2, 0.0, dev, "quadrature"))

    # exact half-mass anchor (even resolution => no node at x = 1/2)
    dom_r = geometry.Rectangle()
    grid_r = discretize.build_grid(dom_r, 64)
    X, Y = grid_r.node_mesh()
    uu = np.sin(3 * math.pi * X) * np.sin(2 * math.pi * Y)
    region = geometry.Region.of(geometry.RectRegion(-1e-9, 0.5, -1e-9, 1 + 1e-9))
    r = control.mass_ratio(grid_r.vector_from_field(uu), region, dom_r, grid_r)
    checks.append(_chk("half_mass_anchor", abs(r - 0.5) <= 1e-12, 0.5, r, 1e-12))

    # dispersing dynamics amplifies round-off exponentially (Lyapunov), so the
    # 1e-9 bound is checked on a horizon double precision can support
    err = experiments.reversibility_error(
        geometry.TorusMinusObstacle(geometry.Disc((0.5, 0.5), 0.25)), (0.1, 0.2), (0.3, 0.7), 4.0
    )
    checks.append(_chk("ray_time_reversibility", err <= 1e-9, 0.0, err, 1e-9))

    box = (1.0, 1.0)
    jx = np.arange(32)
    E0 = np.exp(2j * math.pi * (3 * jx[:, None] / 32 + 1 * jx[None, :] / 32))
    lam = 4 * math.pi**2 * 10
    uf = phase.normalize_field(E0, box)
    H = phase.husimi(uf, lam, box, n_x0=(8, 8), xi_max=2.0)
    pos_ok = bool((H.values >= 0).all())
    checks.append(_chk("husimi_positivity", pos_ok, ">= 0", "ok" if pos_ok else "negative"))

    mA = phase.laplacian_multiplier((64, 64), box, 1.0 / 64)
    mE = phase.projector_multiplier((64, 64), box, 0.05, (1.0, 0.0), 0.5)
    v = rng.standard_normal((64, 64))
    cdef = phase.multiplier_commutator_defect(mA, mE, v)
    checks.append(_chk("microlocal_commutation", cdef <= 1e-12, 0.0, cdef, 1e-12))
    return checks


# ---------------------------------------------------------------------------
# oracle suite
# ---------------------------------------------------------------------------


def _oracle_suite():
    checks = []
    dom = geometry.TorusMinusObstacle(geometry.Disc((0.5, 0.5), 0.25))
    grid = discretize.build_grid(dom, 24)
    op = discretize.assemble_laplacian(dom, grid)
    dense = eigensolve.dense_oracle(op)
    count = 60
    win = eigensolve.solve_window(op, 0.0, count, tol=1e-8)
    lam_d = np.array([p.lam for p in dense[:count]])
    lam_w = np.array([p.lam for p in win])
    scale = float(np.abs(lam_d).max())
    err = float(np.max(np.abs(lam_d - lam_w)))
    checks.append(_chk("sinai24_window_vs_dense_eigenvalues", err <= 1e-9 * scale, 0.0, err, 1e-9 * scale))
    ang = eigensolve.cluster_subspace_defect(win, dense[:count], scale)
    checks.append(_chk("sinai24_subspace_angles", ang <= 1e-6, 0.0, ang, 1e-6))

    res = 10
    grid_s = discretize.build_grid(geometry.Rectangle(), res)
    op_s = discretize.assemble_laplacian(geometry.Rectangle(), grid_s)
    got = np.array([p.lam for p in eigensolve.dense_oracle(op_s)])
    exact = _square_closed_form(res)
    err = float(np.max(np.abs(got - exact) / exact))
    checks.append(_chk("square10_dense_vs_closed_form", err <= 1e-10, 0.0, err, 1e-10))

    # region area against 10x finer quadrature
    dom_st = geometry.Stadium(a=1.0)
    grid_c = discretize.build_grid(dom_st, 128)
    region = control.gamma1_neighborhood(0.1)
    mask = geometry.region_mask(dom_st, region, grid_c)
    area = float(mask.sum()) * grid_c.h**2
    hf = grid_c.h / 10.0
    xs = np.arange(-0.5 + hf / 2, 1.5, hf)
    ys = np.arange(hf / 2, 1.0, hf)
    XF, YF = np.meshgrid(xs, ys, indexing="ij")
    fine = region.contains(dom_st, XF, YF) & np.asarray(dom_st.contains(XF, YF))
    area_fine = float(fine.sum()) * hf**2
    checks.append(
        _chk("gamma1_region_area_vs_fine_quadrature", abs(area - area_fine) <= 3 * grid_c.h, area_fine, area, 3 * grid_c.h)
    )

    # corridor width against brute-force inflation
    domc = geometry.TorusMinusObstacle(geometry.Disc((0.5, 0.5), 0.2))
    cor = geometry.maximal_rectangle(domc, (1, 1), (0.0, 0.5))
    w_oracle = _inflation_oracle(domc, cor)
    checks.append(
        _chk("corridor_width_vs_inflation_oracle", abs(cor.half_width - w_oracle) <= 2e-4, w_oracle, cor.half_width, 2e-4)
    )

    # 1D mode solve against dense solve
    n = 300
    x = np.arange(1, n + 1) / (n + 1)
    f = np.sin(2 * math.pi * x)
    s = -(math.pi**2) + 1.0
    u = modes.solve_shifted_ode(f, s)
    h = 1.0 / (n + 1)
    D = (np.diag(-2.0 * np.ones(n)) + np.diag(np.ones(n - 1), 1) + np.diag(np.ones(n - 1), -1)) / h**2
    u_dense = np.linalg.solve(D - s * np.eye(n), f)
    err = float(np.abs(u - u_dense).max())
    checks.append(_chk("mode_ode_vs_dense_solve", err <= 1e-10, 0.0, err, 1e-10))

    # residual lower bound from the spectral gap under perturbation
    pairs = eigensolve.dense_oracle(op_s)
    lam0 = pairs[0].lam
    gap = pairs[1].lam - pairs[0].lam
    v = pairs[5].vec.copy()
    u0 = pairs[0].vec / np.linalg.norm(pairs[0].vec)
    v = v - (v @ u0) * u0
    v /= np.linalg.norm(v)
    pert = eigensolve.EigenPair(lam0, u0 + 1e-3 * v, 0.0)
    r = eigensolve.residual(op_s, pert)
    bound = gap * 1e-3 * (1 - 1e-6) / math.sqrt(1 + 1e-6)
    checks.append(_chk("residual_gap_lower_bound", r >= bound, f">= {bound}", r))
    return checks


def _inflation_oracle(domain, corridor, step=1e-4, n_line=2000):
    """Brute-force corridor width: inflate until the strip meets the obstacle."""
    ts = np.linspace(0.0, corridor.period, n_line, endpoint=False)
    w = step
    while w < 0.8:
        xs, ys = corridor.point(ts, np.full_like(ts, +w))
        xs2, ys2 = corridor.point(ts, np.full_like(ts, -w))
        inside = domain._in_closed_obstacle(np.concatenate([xs, xs2]), np.concatenate([ys, ys2]))
        if inside.any():
            return w - step
        w += step
    return w


# ---------------------------------------------------------------------------
# theorems suite (acceptance scale)
# ---------------------------------------------------------------------------


def _theorems_suite():
    checks = []

    tables, c_values = experiments.mode_control_experiment(k_max=64)
    spread = float(c_values.max() / c_values.min())
    checks.append(_chk("control_constant_uniformity_k64", spread <= 10.0, "<= 10", spread, 10.0))

    grid_r = discretize.build_grid(geometry.Rectangle(), 256)
    X, Y = grid_r.node_mesh()
    region = geometry.Region.of(geometry.RectRegion(-1e-9, 0.5, -1e-9, 1 + 1e-9))
    worst = 0.0
    for mm in range(1, 9):
        for kk in range(1, 9):
            uu = np.sin(mm * math.pi * X) * np.sin(kk * math.pi * Y)
            r = control.mass_ratio(grid_r.vector_from_field(uu), region, geometry.Rectangle(), grid_r)
            worst = max(worst, abs(r - 0.5))
    checks.append(_chk("pure_mode_half_mass", worst <= 1e-3, 0.5, f"max dev {worst}", 1e-3))

    solve, report = experiments.stadium_edge_experiment(resolution=256, count=200, delta=0.15)
    checks.append(_chk("stadium_edge_min_ratio_positive", report.min_ratio > 0, "> 0", report.min_ratio))
    checks.append(_chk("stadium_edge_slope", report.slope > -0.5, "> -0.5", report.slope))

    solve_s, report_s = experiments.sinai_annulus_experiment(resolution=256, count=200, width=0.1)
    checks.append(_chk("sinai_annulus_min_ratio_positive", report_s.min_ratio > 0, "> 0", report_s.min_ratio))
    checks.append(_chk("sinai_annulus_slope", report_s.slope > -0.5, "> -0.5", report_s.slope))
    peaks = report_s.extra["annulus_peak_fraction"]
    checks.append(_chk("sinai_annulus_heatmap_presence", float(np.min(peaks)) > 1e-3, "> 1e-3", float(np.min(peaks))))

    low, high = experiments.husimi_shell_experiment(solve_s, n_group=20)
    checks.append(
        _chk("husimi_shell_trend", float(np.median(high)) > float(np.median(low)),
             f"median high > {np.median(low)}", float(np.median(high)))
    )

    dom = geometry.TorusMinusObstacle(geometry.Disc((0.5, 0.5), 0.25))
    corridor, n_ob = experiments.corridor_ray_experiment(dom, (1, 0), (0.0, 0.0), T=100.0)
    checks.append(_chk("corridor_zero_obstacle_events", n_ob == 0, 0, n_ob))
    times = experiments.irrational_hitting_experiment(dom, control.obstacle_annulus(dom, 0.1))
    checks.append(_chk("irrational_all_hit", bool(np.isfinite(times).all()), "all < 50", float(np.nanmax(times))))
    err = experiments.reversibility_error(dom, (0.05, 0.15), (0.2, 0.9), 50.0)
    checks.append(_chk("ray_reversibility_1e-9", err <= 1e-9, 0.0, err, 1e-9))
    return checks


SUITES = {"unit": _unit_suite, "oracle": _oracle_suite, "theorems": _theorems_suite}


def run_suite(name):
    """Run a named suite; returns (all_passed, checks, elapsed_seconds)."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r} (have {sorted(SUITES)})")
    t0 = time.time()
    checks = SUITES[name]()
    return all(c.passed for c in checks), checks, time.time() - t0
