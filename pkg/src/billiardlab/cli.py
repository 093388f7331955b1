"""Batch front end: ``billiardlab {solve,scan,rays,husimi,verify}``.

All subcommands read an INI config (see README for the schema), write
artifacts into --out (or $BSL_OUT), and record a JSON manifest listing every
produced file with the config hash, solver settings, seed, and timings.
Outputs are deterministic for a fixed config and seed: rerunning reproduces
bit-identical CSVs.

Exit codes: 0 success, 1 verification failure, 2 config parse error,
3 solver non-convergence, 4 cache/config mismatch.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import control, discretize, eigensolve, geometry, outputs, phase, rays, verify
from .config import ConfigError, config_hash, domain_from_config, load_config, region_from_scan

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_MISMATCH = 4


def _out_dir(args):
    out = os.environ.get("BSL_OUT", args.out)
    os.makedirs(out, exist_ok=True)
    return out


def _manifest(out, cfg, name, artifacts, timings, extra=None):
    dom = dict(cfg.section("domain"))
    man = {
        "config_hash": config_hash(cfg),
        "domain": dom,
        "resolution": cfg.resolution,
        "seed": cfg.seed,
        "threads": cfg.threads,
        "artifacts": sorted(os.path.basename(a) for a in artifacts),
        "timings_s": {k: round(v, 3) for k, v in timings.items()},
    }
    if extra:
        man.update(extra)
    path = os.path.join(out, f"{name}_manifest.json")
    outputs.write_json(path, man)
    return path


def cmd_solve(args):
    try:
        cfg = load_config(args.config)
        domain = domain_from_config(cfg)
        resolution = cfg.resolution
        sec = cfg.section("solve")
        target = float(sec.get("target", "0.0"))
        count = int(sec.get("count", "50"))
        tol = float(sec.get("tol", "1e-8"))
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args)
    seed = args.seed if args.seed is not None else cfg.seed
    t0 = time.time()
    try:
        grid = discretize.build_grid(domain, resolution)
        op = discretize.assemble_laplacian(domain, grid)
        t1 = time.time()
        pairs = eigensolve.solve_window(op, target, count, tol=tol, seed=seed)
    except eigensolve.SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (discretize.DiscretizationError, geometry.GeometryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t2 = time.time()
    cache = os.path.join(out, "eigenpairs.bsleig")
    eigensolve.write_cache(cache, pairs)
    csv_path = os.path.join(out, "eigenvalues.csv")
    outputs.write_csv(
        csv_path,
        ["index", "lambda", "residual"],
        [(i, p.lam, p.residual) for i, p in enumerate(pairs)],
    )
    man = _manifest(
        out,
        cfg,
        "solve",
        [cache, csv_path],
        {"assemble": t1 - t0, "solve": t2 - t1},
        extra={"target": target, "count": count, "tol": tol, "n_interior": op.n, "h": op.h},
    )
    print(f"wrote {cache}, {csv_path}, {man}")
    return EXIT_OK


def _load_matching_cache(args, cfg):
    man_path = os.path.join(os.path.dirname(os.path.abspath(args.cache)), "solve_manifest.json")
    if not os.path.exists(man_path):
        raise FileNotFoundError(f"cache manifest not found next to {args.cache}")
    import json

    with open(man_path) as fh:
        man = json.load(fh)
    if man.get("config_hash") != config_hash(cfg):
        raise ValueError("cache/config hash mismatch")
    return eigensolve.read_cache(args.cache), man


def cmd_scan(args):
    try:
        cfg = load_config(args.config)
        domain = domain_from_config(cfg)
        sec = cfg.section("scan")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        pairs, solve_man = _load_matching_cache(args, cfg)
    except (ValueError, FileNotFoundError, eigensolve.SolverError) as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    out = _out_dir(args)
    grid = discretize.build_grid(domain, cfg.resolution)
    kind = args.kind or sec.get("kind", "thm2")
    t0 = time.time()
    artifacts = []
    summary = {"kind": kind}
    if kind in ("thm1", "thm2"):
        explicit = region_from_scan(cfg, domain)
        if kind == "thm1":
            delta = float(sec.get("delta", "0.15"))
            report = control.edge_mass_scan(domain, grid, pairs, delta=delta, region=explicit)
            region = explicit or control.gamma1_neighborhood(delta)
            rows = [(float(l), float(r)) for l, r in zip(report.lams, report.ratios)]
            header = ["lambda", "ratio"]
        else:
            width = float(sec.get("width", "0.1"))
            region = explicit or control.obstacle_annulus(domain, width)
            report = control.obstacle_mass_scan(domain, grid, pairs, width=width, region=explicit)
            peaks = report.extra["annulus_peak_fraction"]
            rows = [
                (float(l), float(r), float(p))
                for l, r, p in zip(report.lams, report.ratios, peaks)
            ]
            header = ["lambda", "ratio", "annulus_peak_fraction"]
        csv_path = os.path.join(out, f"scan_{kind}.csv")
        outputs.write_csv(csv_path, header, rows)
        artifacts.append(csv_path)
        n_maps = int(sec.get("heatmaps", "8"))
        if n_maps > 0:
            vmask = geometry.region_mask(domain, region, grid)
            sel = np.linspace(0, len(pairs) - 1, min(n_maps, len(pairs))).astype(int)
            for i in sel:
                f2 = grid.field_from_vector(np.asarray(pairs[i].vec)) ** 2
                base = os.path.join(out, f"mode_{i:04d}")
                artifacts.extend(
                    outputs.write_heatmap(base, f2, interior=grid.interior, overlay=vmask)
                )
        summary.update(
            {
                "min_ratio": report.min_ratio,
                "implied_constant": report.implied_constant,
                "slope_log_ratio_vs_log_lambda": report.slope,
                "window_minima": report.window_minima,
            }
        )
    elif kind == "resolvent":
        region = region_from_scan(cfg, domain) or control.obstacle_annulus(
            domain, float(sec.get("width", "0.1"))
        )
        lam = float(sec.get("lam", "100.0"))
        trials = int(sec.get("trials", "8"))
        op = discretize.assemble_laplacian(domain, grid)
        near = [p.lam for p in pairs if abs(p.lam - lam) < 0.1 * max(lam, 1.0)][:3]
        best, rows = control.resolvent_control_check(
            domain, grid, op, lam, region, trials=trials, seed=cfg.seed,
            extra_lams=near + [lam * 1.01 + 1.0, -1.0],
        )
        csv_path = os.path.join(out, "scan_resolvent.csv")
        outputs.write_csv(csv_path, ["lambda", "trial", "ratio", "used_lstsq"], rows)
        artifacts.append(csv_path)
        summary.update({"max_ratio": best})
    elif kind == "orbit":
        start = [float(t) for t in sec.get("orbit_start", "0 0.5").split()]
        d = [float(t) for t in sec.get("orbit_dir", "0 1").split()]
        period = float(sec.get("orbit_time", "1.0"))
        width = float(sec.get("tube_width", "0.2"))
        orbit = rays.evolve(domain, tuple(start), tuple(d), period)
        rows = control.orbit_weakness_measure(domain, grid, orbit, width, pairs)
        csv_path = os.path.join(out, "scan_orbit.csv")
        outputs.write_csv(csv_path, ["lambda", "off_tube_mass", "one_over_log_lambda"], rows)
        artifacts.append(csv_path)
        summary.update({"rows": len(rows)})
    else:
        print(f"config error: unknown scan kind {kind!r}", file=sys.stderr)
        return EXIT_CONFIG
    summary_path = os.path.join(out, f"scan_{kind}_summary.json")
    outputs.write_json(summary_path, summary)
    artifacts.append(summary_path)
    _manifest(out, cfg, f"scan_{kind}", artifacts, {"scan": time.time() - t0})
    print(f"wrote {summary_path}")
    return EXIT_OK


def cmd_rays(args):
    try:
        cfg = load_config(args.config)
        domain = domain_from_config(cfg)
        sec = cfg.section("rays")
        L = float(sec.get("horizon", "50.0"))
        width = float(sec.get("region_width", "0.1"))
        n_angle = int(sec.get("n_angle", "64"))
        n_pos = int(sec.get("n_pos", "32"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args)
    t0 = time.time()
    if isinstance(domain, geometry.Stadium):
        r = domain.wing_radius
        region = geometry.Region.of(geometry.AnnulusRegion((0.0, domain.a / 2), 0.0, r))
    else:
        region = control.obstacle_annulus(domain, width)
    frac, hit, samples = rays.geometric_control_check(
        domain, region, L, n_pos=(n_pos, n_pos), n_angle=n_angle
    )
    un = np.isnan(hit)
    csv_path = os.path.join(out, "uncontrolled.csv")
    outputs.write_csv(
        csv_path,
        ["x", "y", "theta"],
        [(float(x), float(y), float(th)) for x, y, th in samples[un]],
    )
    start = [float(t) for t in sec.get("trajectory_start", "0.1 0.2").split()]
    d = [float(t) for t in sec.get("trajectory_dir", "0.3 0.7").split()]
    traj = rays.evolve(domain, tuple(start), tuple(d), float(sec.get("trajectory_time", "10")))
    ev_path = os.path.join(out, "trajectory_events.csv")
    outputs.write_csv(
        ev_path,
        ["t", "x", "y", "dx_in", "dy_in", "dx_out", "dy_out", "kind"],
        [
            (e.t, e.point[0], e.point[1], e.incoming[0], e.incoming[1], e.outgoing[0], e.outgoing[1], e.kind)
            for e in traj.events
        ],
    )
    summary = os.path.join(out, "rays_summary.json")
    outputs.write_json(summary, {"controlled_fraction": frac, "horizon": L, "samples": int(len(samples))})
    _manifest(out, cfg, "rays", [csv_path, ev_path, summary], {"rays": time.time() - t0})
    print(f"controlled fraction {frac:.4f}; wrote {summary}")
    return EXIT_OK


def cmd_husimi(args):
    try:
        cfg = load_config(args.config)
        domain = domain_from_config(cfg)
        sec = cfg.section("husimi") if cfg.parser.has_section("husimi") else {}
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        pairs, _ = _load_matching_cache(args, cfg)
    except (ValueError, FileNotFoundError) as exc:
        print(f"cache error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    out = _out_dir(args)
    grid = discretize.build_grid(domain, cfg.resolution)
    if not (grid.periodic_x and grid.periodic_y):
        print("config error: husimi requires a torus domain", file=sys.stderr)
        return EXIT_CONFIG
    n_x0 = [int(t) for t in (sec.get("n_x0", "16 16") if sec else "16 16").split()]
    xi_max = float(sec.get("xi_max", "2.0") if sec else 2.0)
    band = (0.8, 1.2)
    t0 = time.time()
    rows = []
    artifacts = []
    box = (1.0, 1.0)
    for i, p in enumerate(pairs):
        if p.lam <= 0:
            continue
        u = phase.normalize_field(grid.field_from_vector(np.asarray(p.vec)), box)
        H = phase.husimi(u, p.lam, box, n_x0=tuple(n_x0), xi_max=xi_max)
        rows.append((i, float(p.lam), phase.shell_mass(H, band), H.total_mass()))
        if i in (0, len(pairs) - 1):
            mass_xi = H.values.sum(axis=(0, 1))
            base = os.path.join(out, f"husimi_xi_mode_{i:04d}")
            artifacts.extend(outputs.write_heatmap(base, mass_xi))
            slice_rows = []
            for ix0 in range(len(H.x0x)):
                for iy0 in range(len(H.x0y)):
                    for ax in range(len(H.xi_x)):
                        for ay in range(len(H.xi_y)):
                            slice_rows.append(
                                (float(H.x0x[ix0]), float(H.x0y[iy0]), float(H.xi_x[ax]),
                                 float(H.xi_y[ay]), float(H.values[ix0, iy0, ax, ay]))
                            )
            sp = os.path.join(out, f"husimi_slice_mode_{i:04d}.csv")
            outputs.write_csv(sp, ["x0", "y0", "xi0x", "xi0y", "H"], slice_rows)
            artifacts.append(sp)
            centers, marg = phase.direction_marginal(H, nbins=36, band=band)
            mp = os.path.join(out, f"husimi_marginal_mode_{i:04d}.csv")
            outputs.write_csv(mp, ["theta_bin", "mass"], list(zip(centers.tolist(), marg.tolist())))
            artifacts.append(mp)
    csv_path = os.path.join(out, "husimi_shell.csv")
    outputs.write_csv(csv_path, ["index", "lambda", "shell_mass", "total_mass"], rows)
    artifacts.append(csv_path)
    _manifest(out, cfg, "husimi", artifacts, {"husimi": time.time() - t0})
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_verify(args):
    out = _out_dir(args)
    ok, checks, elapsed = verify.run_suite(args.suite)
    csv_path = os.path.join(out, f"verify_{args.suite}.csv")
    outputs.write_csv(
        csv_path,
        ["check", "passed", "expected", "actual", "tolerance"],
        [(c.name, int(c.passed), c.expected, c.actual, c.tol) for c in checks],
    )
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: actual={c.actual} expected={c.expected}")
    print(f"suite {args.suite}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s); wrote {csv_path}")
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None):
    ap = argparse.ArgumentParser(prog="billiardlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, cache=False):
        p.add_argument("--config", required=True, help="INI config path")
        p.add_argument("--out", default="out", help="output directory (env BSL_OUT overrides)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--threads", type=int, default=None, help="thread cap (informational)")
        if cache:
            p.add_argument("--cache", required=True, help="eigenpair cache produced by solve")

    common(sub.add_parser("solve", help="solve an eigen-window and cache it"))
    p_scan = sub.add_parser("scan", help="run a mass/resolvent/orbit scan on a cache")
    common(p_scan, cache=True)
    p_scan.add_argument("--kind", choices=["thm1", "thm2", "resolvent", "orbit"], default=None)
    common(sub.add_parser("rays", help="classical geometric-control diagnostics"))
    p_h = sub.add_parser("husimi", help="phase-space shell statistics for a cache")
    common(p_h, cache=True)
    p_v = sub.add_parser("verify", help="run a self-verification suite")
    p_v.add_argument("--suite", choices=["unit", "oracle", "theorems"], default="unit")
    p_v.add_argument("--out", default="out")

    args = ap.parse_args(argv)
    handler = {
        "solve": cmd_solve,
        "scan": cmd_scan,
        "rays": cmd_rays,
        "husimi": cmd_husimi,
        "verify": cmd_verify,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
