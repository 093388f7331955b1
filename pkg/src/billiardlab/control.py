"""Mass-ratio functionals and non-concentration scan harnesses.

The central quantity is the control-region mass fraction

    r_V(u) = sum_{V} h^2 u^2 / sum_{denominator} h^2 u^2,

evaluated by staircase grid quadrature.  ``edge_mass_scan`` measures, for
eigenfunctions of a partially rectangular billiard, the mass in a
delta-neighborhood of the interior vertical sides (gamma1) relative to the
mass in the rectangle; a positive lower bound uniform in the eigenvalue is
the non-concentration property.  ``obstacle_mass_scan`` does the same for an
annulus around the obstacle of a Sinai-type billiard, relative to total mass.

Each scan reports per-mode ratios, the minimum (and its implied constant
C = 1/min), sliding-window minima in lambda, and the least-squares slope of
log ratio against log lambda: a slope near zero means no power-law decay of
the control mass, which is the testable shadow of a lambda-independent
constant.

``resolvent_control_check`` probes the observability inequality for the
shifted problem (A - lam) u = f with random data, switching to an iterative
least-squares pseudo-solution near eigenvalues.  ``orbit_weakness_measure``
only measures tube-complement mass along a closed orbit next to 1/log(lam);
no assertion is attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geometry import (
    AnnulusRegion,
    BoundaryNeighborhood,
    Disc,
    Region,
    region_mask,
)

__all__ = [
    "ControlError",
    "MassScanReport",
    "mass_ratio",
    "edge_mass_scan",
    "obstacle_mass_scan",
    "resolvent_control_check",
    "orbit_weakness_measure",
    "gamma1_neighborhood",
    "obstacle_annulus",
]


class ControlError(ValueError):
    pass


@dataclass
class MassScanReport:
    lams: np.ndarray
    ratios: np.ndarray
    min_ratio: float
    implied_constant: float
    slope: float
    window_minima: list
    extra: dict = field(default_factory=dict)

    @staticmethod
    def from_rows(lams, ratios, extra=None, n_windows=8):
        lams = np.asarray(lams, dtype=float)
        ratios = np.asarray(ratios, dtype=float)
        order = np.argsort(lams, kind="stable")
        lams = lams[order]
        ratios = ratios[order]
        if extra:
            extra = {k: np.asarray(v)[order] for k, v in extra.items()}
        else:
            extra = {}
        min_ratio = float(ratios.min())
        pos = (lams > 0) & (ratios > 0)
        if pos.sum() >= 2:
            slope = float(np.polyfit(np.log(lams[pos]), np.log(ratios[pos]), 1)[0])
        else:
            slope = 0.0
        windows = []
        nw = min(n_windows, len(lams))
        for chunk in np.array_split(np.arange(len(lams)), nw):
            if len(chunk):
                windows.append(
                    (float(lams[chunk[0]]), float(lams[chunk[-1]]), float(ratios[chunk].min()))
                )
        return MassScanReport(
            lams=lams,
            ratios=ratios,
            min_ratio=min_ratio,
            implied_constant=math.inf if min_ratio == 0 else 1.0 / min_ratio,
            slope=slope,
            window_minima=windows,
            extra=extra,
        )


def mass_ratio(u, region, domain, grid):
    """Region mass fraction of |u|^2 by grid quadrature (denominator: whole
    domain)."""
    u = np.asarray(u, dtype=float)
    mask_v = region_mask(domain, region, grid)
    f2 = grid.field_from_vector(u) ** 2
    total = float(f2[grid.interior].sum())
    if total == 0:
        raise ControlError("zero total mass")
    return float(f2[mask_v].sum()) / total


def gamma1_neighborhood(delta):
    return Region.of(BoundaryNeighborhood("gamma1", delta))


def obstacle_annulus(domain, width):
    """Annulus of total width ``width`` straddling the obstacle boundary."""
    ob = getattr(domain, "obstacle", None)
    if ob is None:
        raise ControlError("domain has no obstacle")
    if isinstance(ob, Disc):
        r = ob.radius
        return Region.of(AnnulusRegion(ob.center, max(r - width / 2, 0.0), r + width / 2))
    return Region.of(BoundaryNeighborhood("obstacle", width / 2))


def edge_mass_scan(domain, grid, pairs, delta=None, region=None):
    """Mass near gamma1 relative to mass in the rectangle, per eigenpair.

    Either ``delta`` (neighborhood width) or an explicit ``region`` must be
    given; the region must meet a neighborhood of gamma1.
    """
    if region is None:
        if delta is None:
            raise ControlError("need delta or an explicit region")
        region = gamma1_neighborhood(delta)
    mask_v = region_mask(domain, region, grid)
    X, Y = grid.node_mesh()
    pieces = domain.boundary_pieces()
    if "gamma1" not in pieces:
        raise ControlError("domain has no gamma1 boundary pieces")
    dist_g1 = None
    for prim in pieces["gamma1"]:
        d = prim.distance(X, Y)
        dist_g1 = d if dist_g1 is None else np.minimum(dist_g1, d)
    probe = delta if delta is not None else 0.2 * (domain.rect_part()[3] - domain.rect_part()[2])
    if not (mask_v & (dist_g1 < probe + 2 * grid.h)).any():
        raise ControlError("control region misses gamma1 entirely")
    x0, x1, y0, y1 = domain.rect_part()
    mask_r = (
        (X >= x0 - 1e-12) & (X <= x1 + 1e-12) & (Y >= y0 - 1e-12) & (Y <= y1 + 1e-12) & grid.interior
    )
    lams, ratios = [], []
    for p in pairs:
        f2 = grid.field_from_vector(np.asarray(p.vec)) ** 2
        den = float(f2[mask_r].sum())
        if den == 0:
            raise ControlError("eigenfunction carries no mass in the rectangle")
        lams.append(p.lam)
        ratios.append(float(f2[mask_v].sum()) / den)
    return MassScanReport.from_rows(lams, ratios)


def obstacle_mass_scan(domain, grid, pairs, width=None, region=None):
    """Mass in an annulus around the obstacle relative to total mass.

    Also records, per mode, the peak of |u|^2 inside the annulus relative to
    the global peak (the heatmap non-vanishing diagnostic).
    """
    if region is None:
        if width is None:
            raise ControlError("need an annulus width or an explicit region")
        region = obstacle_annulus(domain, width)
    mask_v = region_mask(domain, region, grid)
    lams, ratios, peaks = [], [], []
    for p in pairs:
        f2 = grid.field_from_vector(np.asarray(p.vec)) ** 2
        total = float(f2[grid.interior].sum())
        if total == 0:
            raise ControlError("zero total mass")
        lams.append(p.lam)
        ratios.append(float(f2[mask_v].sum()) / total)
        gmax = float(f2.max())
        peaks.append(float(f2[mask_v].max()) / gmax if gmax > 0 else 0.0)
    return MassScanReport.from_rows(lams, ratios, extra={"annulus_peak_fraction": peaks})


def resolvent_control_check(domain, grid, op, lam, region, trials=8, seed=0, extra_lams=None):
    """Max of ||u|| / (||f|| + ||u 1_V||) over random unit data at shifts
    around ``lam`` (grid-weighted norms).

    Well-separated shifts solve (A - lam) directly (sparse LU); shifts at or
    near eigenvalues fall back to an iterative least-squares pseudo-solution.
    Returns (max_ratio, rows) with rows (lam, trial, ratio, used_lstsq).
    """
    if trials < 1:
        raise ControlError("trials must be >= 1")
    mask_v = region_mask(domain, region, grid)
    sel_v = mask_v[grid.interior]
    rng = np.random.default_rng(seed)
    lams = [float(lam)]
    if extra_lams is not None:
        lams.extend(float(x) for x in extra_lams)
    rows = []
    best = 0.0
    A = op.csr
    n = op.n
    for lam_i in lams:
        M = (A - lam_i * sp.identity(n, format="csr")).tocsc()
        solver = None
        try:
            lu = spla.splu(M)
            solver = ("lu", lu)
        except RuntimeError:
            solver = ("lstsq", None)
        for trial in range(trials):
            f = rng.standard_normal(n)
            f /= op.h * np.linalg.norm(f)
            used_lstsq = False
            if solver[0] == "lu":
                u = solver[1].solve(f)
                res = np.linalg.norm(M @ u - f) / np.linalg.norm(f)
                if not np.isfinite(res) or res > 1e-6:
                    u = None
            else:
                u = None
            if u is None:
                used_lstsq = True
                out = spla.lsmr(M, f, atol=1e-12, btol=1e-12, maxiter=20 * n)
                u = out[0]
            nu = op.h * np.linalg.norm(u)
            nf = op.h * np.linalg.norm(f)
            nv = op.h * np.linalg.norm(u[sel_v])
            ratio = nu / (nf + nv)
            rows.append((lam_i, trial, float(ratio), used_lstsq))
            best = max(best, float(ratio))
    return best, rows


def _orbit_polyline(orbit):
    """Free-flight vertices (continuous coordinates) of a trajectory."""
    pts = []
    for t0, p0, d in orbit.segments:
        pts.append((t0, p0, d))
    verts = []
    for i, (t0, p0, d) in enumerate(pts):
        t1 = pts[i + 1][0] if i + 1 < len(pts) else orbit.total_time
        verts.append((p0, (p0[0] + (t1 - t0) * d[0], p0[1] + (t1 - t0) * d[1])))
    return verts


def _distance_to_polyline_torus(X, Y, segments):
    from .geometry import _point_segment_distance

    best = None
    for (a, b) in segments:
        ar = (a[0] % 1.0, a[1] % 1.0)
        shift = (a[0] - ar[0], a[1] - ar[1])
        br = (b[0] - shift[0], b[1] - shift[1])
        for ox in (-1.0, 0.0, 1.0):
            for oy in (-1.0, 0.0, 1.0):
                d = _point_segment_distance(X, Y, ar[0] + ox, ar[1] + oy, br[0] + ox, br[1] + oy)
                best = d if best is None else np.minimum(best, d)
    return best


def orbit_weakness_measure(domain, grid, orbit, width, pairs):
    """Tube-complement mass along a closed orbit, tabulated against 1/log lam.

    chi is a smooth cutoff equal to 1 within width/2 of the orbit and 0 beyond
    width; rows are (lam, off_tube_mass, 1/log lam) for pairs with lam > e.
    Measurement only -- no pass/fail is attached.
    """
    from .phase import _smoothstep

    X, Y = grid.node_mesh()
    segs = _orbit_polyline(orbit)
    dist = _distance_to_polyline_torus(X, Y, segs)
    chi = 1.0 - _smoothstep((dist - width / 2.0) / (width / 2.0))
    off = (1.0 - chi)[grid.interior]
    if float(off.max()) < 1e-12:
        raise ControlError("tube covers the whole domain")
    rows = []
    for p in pairs:
        if p.lam <= math.e:
            continue
        u2 = np.asarray(p.vec) ** 2
        total = float(u2.sum())
        if total == 0:
            raise ControlError("zero total mass")
        off_mass = float((u2 * off).sum()) / total
        rows.append((float(p.lam), off_mass, 1.0 / math.log(p.lam)))
    return rows
