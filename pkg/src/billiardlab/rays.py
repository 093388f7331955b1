"""Event-driven classical billiard flow.

Free flight at unit speed with specular reflection off obstacles and outer
boundaries, using closed-form segment/circle intersections only (no time
stepping, so energy is conserved exactly and hitting claims are exact up to
round-off).  On the torus the flight is unfolded cell by cell: the obstacle
closure lies strictly inside the fundamental cell, so each unit cell contains
exactly one obstacle image and a flight segment inside a cell can only meet
that image.

Tangential grazing within angle 1e-12 is recorded as a pass-through event
with a warning flag (the measure-zero convention).

``geometric_control_check`` runs a lockstep-vectorized batch of trajectories
(exact geometry, numpy arrays across trajectories) to estimate the fraction
of phase space controlled by a region within a time horizon; uncontrolled
initial conditions cluster in rational corridors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    AnnulusRegion,
    Barrier,
    Disc,
    RectRegion,
    SquareMinusObstacle,
    Stadium,
    TorusMinusObstacle,
)

__all__ = ["RayError", "Event", "Trajectory", "evolve", "hitting_time", "geometric_control_check",
           "segment_hits_obstacle"]

_EPS_T = 1e-12
_GRAZE = 1e-12


class RayError(ValueError):
    pass


@dataclass(frozen=True)
class Event:
    t: float
    point: tuple[float, float]
    incoming: tuple[float, float]
    outgoing: tuple[float, float]
    kind: str  # obstacle | wall | arc | slit | grazing


@dataclass
class Trajectory:
    start: tuple[float, float]
    direction: tuple[float, float]
    total_time: float
    events: list[Event] = field(default_factory=list)
    # free-flight pieces (t0, point at t0 in continuous coords, direction)
    segments: list = field(default_factory=list)
    periodic: bool = False

    def position(self, t):
        if t < 0 or t > self.total_time + _EPS_T:
            raise RayError("time outside trajectory range")
        seg = self.segments[0]
        for s in self.segments:
            if s[0] <= t + _EPS_T:
                seg = s
            else:
                break
        t0, (px, py), (dx, dy) = seg
        x, y = px + (t - t0) * dx, py + (t - t0) * dy
        if self.periodic:
            return x % 1.0, y % 1.0
        return x, y

    def direction_at(self, t):
        seg = self.segments[0]
        for s in self.segments:
            if s[0] <= t + _EPS_T:
                seg = s
            else:
                break
        return seg[2]


def _unit(d):
    n = math.hypot(d[0], d[1])
    if n == 0:
        raise RayError("direction must be nonzero")
    return d[0] / n, d[1] / n


def _reflect(d, n):
    # renormalize n: hit points sit on curved boundaries only to round-off,
    # and an off-unit normal lets the speed drift across many reflections
    nn = math.hypot(n[0], n[1])
    nx, ny = n[0] / nn, n[1] / nn
    dot = d[0] * nx + d[1] * ny
    return d[0] - 2 * dot * nx, d[1] - 2 * dot * ny


def _disc_hit(p, d, c, r, t_max):
    """Earliest t in (EPS, t_max] where p + t d meets the circle |x-c| = r."""
    ex, ey = p[0] - c[0], p[1] - c[1]
    b = ex * d[0] + ey * d[1]
    q = ex * ex + ey * ey - r * r
    disc = b * b - q
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    for t in (-b - sq, -b + sq):
        if _EPS_T < t <= t_max:
            return t
    return None


def _segment_hit(p, d, a, b, t_max):
    """Ray/segment intersection: returns (t, unit normal) or None."""
    ex, ey = b[0] - a[0], b[1] - a[1]
    det = d[1] * ex - d[0] * ey  # solve t*d - s*e = a - p
    if abs(det) < 1e-300:
        return None
    rx, ry = a[0] - p[0], a[1] - p[1]
    t = (ry * ex - rx * ey) / det
    s = (d[0] * ry - d[1] * rx) / det
    if not (_EPS_T < t <= t_max and -1e-12 <= s <= 1 + 1e-12):
        return None
    L = math.hypot(ex, ey)
    n = (-ey / L, ex / L)
    return t, n


def _obstacle_hit(obstacle, p, d, t_max):
    """Earliest obstacle hit within t_max: returns (t, unit normal) or None."""
    if isinstance(obstacle, Disc):
        t = _disc_hit(p, d, obstacle.center, obstacle.radius, t_max)
        if t is None:
            return None
        hx, hy = p[0] + t * d[0], p[1] + t * d[1]
        n = ((hx - obstacle.center[0]) / obstacle.radius, (hy - obstacle.center[1]) / obstacle.radius)
        return t, n
    best = None
    for a, b in obstacle._edges():
        hit = _segment_hit(p, d, a, b, t_max)
        if hit is not None and (best is None or hit[0] < best[0]):
            best = hit
    return best


def segment_hits_obstacle(domain, p, d, length):
    """True when the free-flight segment of given length meets the obstacle.

    Torus domains unfold the segment cell by cell; used by the phase-space
    tools to enforce interior propagation.
    """
    if not isinstance(domain, TorusMinusObstacle):
        raise RayError("segment test requires a torus-minus-obstacle domain")
    d = _unit(d)
    px, py = float(p[0]), float(p[1])
    ix, iy = math.floor(px), math.floor(py)
    t_used = 0.0
    guard = 0
    while t_used < length - _EPS_T:
        guard += 1
        if guard > 100000:
            raise RayError("cell walk did not terminate")
        tx = _cell_crossing(px, d[0], ix)
        ty = _cell_crossing(py, d[1], iy)
        t_cell = min(tx, ty)
        t_seg = min(t_cell, length - t_used)
        off = (ix, iy)
        ob = domain.obstacle
        if ob is None:
            pass
        elif isinstance(ob, Disc):
            hit = _disc_hit((px, py), d, (ob.center[0] + off[0], ob.center[1] + off[1]), ob.radius, t_seg)
            if hit is not None:
                return True
        else:
            for a, b in ob._edges():
                if _segment_hit((px, py), d, (a[0] + off[0], a[1] + off[1]), (b[0] + off[0], b[1] + off[1]), t_seg):
                    return True
        px += t_seg * d[0]
        py += t_seg * d[1]
        t_used += t_seg
        if t_cell <= t_seg + _EPS_T:
            if tx <= ty + _EPS_T:
                ix += 1 if d[0] > 0 else -1
            if ty <= tx + _EPS_T:
                iy += 1 if d[1] > 0 else -1
    return False


def _cell_crossing(x, dx, ix):
    if dx > 1e-15:
        return ((ix + 1) - x) / dx
    if dx < -1e-15:
        return (ix - x) / dx
    return math.inf


# ---------------------------------------------------------------------------
# scalar evolution
# ---------------------------------------------------------------------------


def _evolve_torus(domain, start, d, T, region_prims=None):
    """Unfolded cell walk; optionally reports first entry into region prims."""
    px, py = float(start[0]) % 1.0, float(start[1]) % 1.0
    ix, iy = 0, 0
    t = 0.0
    traj = Trajectory(start=(px, py), direction=d, total_time=T, periodic=True)
    traj.segments.append((0.0, (px, py), d))
    if region_prims is not None and _prims_contain(region_prims, px % 1.0, py % 1.0):
        return traj, 0.0
    guard = 0
    while t < T - _EPS_T:
        guard += 1
        if guard > 10_000_000:
            raise RayError("evolution did not terminate")
        tx = _cell_crossing(px, d[0], ix)
        ty = _cell_crossing(py, d[1], iy)
        t_cell = min(tx, ty)
        t_seg = min(t_cell, T - t)
        ob = domain.obstacle
        if ob is None:
            hit = None
        elif isinstance(ob, Disc):
            c_img = (ob.center[0] + ix, ob.center[1] + iy)
            hit = _disc_hit((px, py), d, c_img, ob.radius, t_seg)
            normal = None
            if hit is not None:
                hx, hy = px + hit * d[0], py + hit * d[1]
                normal = ((hx - c_img[0]) / ob.radius, (hy - c_img[1]) / ob.radius)
                hit = (hit, normal)
        else:
            hit = None
            for a, b in ob._edges():
                cand = _segment_hit((px, py), d, (a[0] + ix, a[1] + iy), (b[0] + ix, b[1] + iy), t_seg)
                if cand is not None and (hit is None or cand[0] < hit[0]):
                    hit = cand
        if region_prims is not None:
            te = _prims_entry(region_prims, (px - ix, py - iy), d, t_seg, torus=True)
            if te is not None and (hit is None or te <= hit[0]):
                return traj, t + te
        if hit is not None:
            th, n = hit
            px += th * d[0]
            py += th * d[1]
            t += th
            grazing = abs(d[0] * n[0] + d[1] * n[1]) < _GRAZE
            out = d if grazing else _reflect(d, n)
            traj.events.append(
                Event(t, ((px - ix) % 1.0, (py - iy) % 1.0), d, out,
                      "grazing" if grazing else "obstacle")
            )
            d = out
            traj.segments.append((t, (px, py), d))
            continue
        px += t_seg * d[0]
        py += t_seg * d[1]
        t += t_seg
        if t_cell <= t_seg + _EPS_T and t < T - _EPS_T:
            if tx <= ty + _EPS_T:
                ix += 1 if d[0] > 0 else -1
            if ty <= tx + _EPS_T:
                iy += 1 if d[1] > 0 else -1
    return traj, None


def _stadium_candidates(domain, p, d, t_max):
    """Earliest boundary hit for the stadium: two walls and two arcs."""
    a = domain.a
    r = domain.wing_radius
    best = None
    if d[1] > 1e-15:
        t = (a - p[1]) / d[1]
        x = p[0] + t * d[0]
        if _EPS_T < t <= t_max and 0 <= x <= 1:
            best = (t, (0.0, -1.0), "wall")
    if d[1] < -1e-15:
        t = (0.0 - p[1]) / d[1]
        x = p[0] + t * d[0]
        if _EPS_T < t <= t_max and 0 <= x <= 1:
            cand = (t, (0.0, 1.0), "wall")
            if best is None or cand[0] < best[0]:
                best = cand
    for cx, side in ((0.0, -1), (1.0, +1)):
        c = (cx, a / 2.0)
        ex, ey = p[0] - c[0], p[1] - c[1]
        b = ex * d[0] + ey * d[1]
        q = ex * ex + ey * ey - r * r
        disc = b * b - q
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        for t in (-b - sq, -b + sq):
            if not (_EPS_T < t <= t_max):
                continue
            x = p[0] + t * d[0]
            if (side < 0 and x <= 1e-12) or (side > 0 and x >= 1 - 1e-12):
                hx, hy = p[0] + t * d[0], p[1] + t * d[1]
                n = ((hx - c[0]) / r, (hy - c[1]) / r)
                cand = (t, n, "arc")
                if best is None or cand[0] < best[0]:
                    best = cand
                break
    return best


def _box_candidates(x0, x1, y0, y1, p, d, t_max):
    best = None
    for t, n, ok in (
        ((x1 - p[0]) / d[0] if d[0] > 1e-15 else math.inf, (-1.0, 0.0), "x"),
        ((x0 - p[0]) / d[0] if d[0] < -1e-15 else math.inf, (1.0, 0.0), "x"),
        ((y1 - p[1]) / d[1] if d[1] > 1e-15 else math.inf, (0.0, -1.0), "y"),
        ((y0 - p[1]) / d[1] if d[1] < -1e-15 else math.inf, (0.0, 1.0), "y"),
    ):
        if _EPS_T < t <= t_max and (best is None or t < best[0]):
            best = (t, n, "wall")
    return best


def _evolve_bounded(domain, start, d, T, region_prims=None):
    """Stadium / rectangle / square-with-obstacle / barrier evolution."""
    px, py = float(start[0]), float(start[1])
    t = 0.0
    traj = Trajectory(start=(px, py), direction=d, total_time=T)
    traj.segments.append((0.0, (px, py), d))
    if region_prims is not None and _prims_contain(region_prims, px, py):
        return traj, 0.0
    guard = 0
    while t < T - _EPS_T:
        guard += 1
        if guard > 10_000_000:
            raise RayError("evolution did not terminate")
        t_rem = T - t
        if isinstance(domain, Stadium):
            hit = _stadium_candidates(domain, (px, py), d, t_rem)
        else:
            x0, x1, y0, y1 = domain.bounding_box()
            hit = _box_candidates(x0, x1, y0, y1, (px, py), d, t_rem)
            extra = None
            if isinstance(domain, SquareMinusObstacle):
                ob = _obstacle_hit(domain.obstacle, (px, py), d, t_rem)
                if ob is not None:
                    extra = (ob[0], ob[1], "obstacle")
            elif isinstance(domain, Barrier):
                sl = _segment_hit(
                    (px, py), d, (domain.slit_x, domain.slit_y0), (domain.slit_x, domain.slit_y1), t_rem
                )
                if sl is not None:
                    extra = (sl[0], sl[1], "slit")
            if extra is not None and (hit is None or extra[0] < hit[0]):
                hit = extra
        t_seg = t_rem if hit is None else hit[0]
        if region_prims is not None:
            te = _prims_entry(region_prims, (px, py), d, t_seg, torus=False)
            if te is not None:
                return traj, t + te
        if hit is None:
            t = T
            break
        th, n, kind = hit
        px += th * d[0]
        py += th * d[1]
        t += th
        grazing = abs(d[0] * n[0] + d[1] * n[1]) < _GRAZE
        out = d if grazing else _reflect(d, n)
        traj.events.append(Event(t, (px, py), d, out, "grazing" if grazing else kind))
        d = out
        traj.segments.append((t, (px, py), d))
    return traj, None


def evolve(domain, start, direction, T):
    """Trace the billiard flow for time T from an interior start point."""
    if T <= 0:
        raise RayError("T must be positive")
    d = _unit(direction)
    # a start on the boundary (to round-off) is fine if it moves inward
    if not bool(domain.contains(start[0], start[1])) and not bool(
        domain.contains(start[0] + 1e-9 * d[0], start[1] + 1e-9 * d[1])
    ):
        raise RayError("start point must lie in the open domain")
    if isinstance(domain, TorusMinusObstacle):
        traj, _ = _evolve_torus(domain, start, d, T)
    else:
        traj, _ = _evolve_bounded(domain, start, d, T)
    return traj


# ---------------------------------------------------------------------------
# region entry
# ---------------------------------------------------------------------------


def _prims_contain(prims, x, y):
    return any(bool(p.contains(x, y)) for p in prims)


def _annulus_entry(prim, p, d, t_max):
    """First time in [0, t_max] entering the open annulus from p along d."""
    cands = []
    for r in (prim.r_out, prim.r_in if prim.r_in > 0 else None):
        if r is None:
            continue
        ex, ey = p[0] - prim.center[0], p[1] - prim.center[1]
        b = ex * d[0] + ey * d[1]
        q = ex * ex + ey * ey - r * r
        disc = b * b - q
        if disc < 0:
            continue
        sq = math.sqrt(disc)
        cands.extend([-b - sq, -b + sq])
    best = None
    for tc in cands:
        if -1e-12 < tc <= t_max:
            probe = max(tc, 0.0) + 1e-9
            x, y = p[0] + probe * d[0], p[1] + probe * d[1]
            if bool(prim.contains(x, y)) and (best is None or tc < best):
                best = max(tc, 0.0)
    return best


def _rect_entry(prim, p, d, t_max):
    t_lo, t_hi = 0.0, t_max
    for lo, hi, pos, vel in ((prim.x0, prim.x1, p[0], d[0]), (prim.y0, prim.y1, p[1], d[1])):
        if abs(vel) < 1e-15:
            if not (lo < pos < hi):
                return None
            continue
        ta, tb = (lo - pos) / vel, (hi - pos) / vel
        if ta > tb:
            ta, tb = tb, ta
        t_lo, t_hi = max(t_lo, ta), min(t_hi, tb)
    if t_lo < t_hi - 1e-15:
        return t_lo
    return None


def _prim_entry(prim, p, d, t_max):
    if isinstance(prim, AnnulusRegion):
        return _annulus_entry(prim, p, d, t_max)
    if isinstance(prim, RectRegion):
        return _rect_entry(prim, p, d, t_max)
    raise RayError(f"unsupported region primitive {type(prim)!r}")


def _prims_entry(prims, p, d, t_max, torus):
    best = None
    offsets = [(ox, oy) for ox in (-1.0, 0.0, 1.0) for oy in (-1.0, 0.0, 1.0)] if torus else [(0.0, 0.0)]
    for prim in prims:
        for ox, oy in offsets:
            te = _prim_entry(prim, (p[0] - ox, p[1] - oy), d, t_max)
            if te is not None and (best is None or te < best):
                best = te
    return best


def hitting_time(domain, start, direction, region, T_max):
    """First entry time of the trajectory into the region, or None."""
    if T_max <= 0:
        raise RayError("T_max must be positive")
    d = _unit(direction)
    prims = region.resolve(domain)
    if isinstance(domain, TorusMinusObstacle):
        _, te = _evolve_torus(domain, start, d, T_max, region_prims=prims)
    else:
        _, te = _evolve_bounded(domain, start, d, T_max, region_prims=prims)
    return te


# ---------------------------------------------------------------------------
# batched geometric control check
# ---------------------------------------------------------------------------


def geometric_control_check(domain, region, L, n_pos=(32, 32), n_angle=64):
    """Fraction of sampled unit-speed trajectories meeting the region by time L.

    Samples a regular (position x angle) phase-space grid and runs all
    trajectories in vectorized lockstep with exact event geometry.  Returns
    (fraction_controlled, hit_times, samples) where hit_times is NaN for
    uncontrolled samples; ``samples`` is the (M, 3) array of (x, y, theta).
    """
    if n_pos[0] * n_pos[1] * n_angle < 32 * 32 * 64:
        raise RayError("sample grid too small: need at least 32 x 32 x 64")
    x0, x1, y0, y1 = domain.bounding_box()
    gx = x0 + (np.arange(n_pos[0]) + 0.5) * (x1 - x0) / n_pos[0]
    gy = y0 + (np.arange(n_pos[1]) + 0.5) * (y1 - y0) / n_pos[1]
    th = np.arange(n_angle) * (2 * math.pi / n_angle)
    X, Y, TH = np.meshgrid(gx, gy, th, indexing="ij")
    X, Y, TH = X.ravel(), Y.ravel(), TH.ravel()
    keep = np.asarray(domain.contains(X, Y))
    X, Y, TH = X[keep], Y[keep], TH[keep]
    P = np.column_stack([X, Y])
    D = np.column_stack([np.cos(TH), np.sin(TH)])
    prims = region.resolve(domain)
    if isinstance(domain, TorusMinusObstacle):
        hit = _batch_torus(domain, P.copy(), D.copy(), prims, L)
    elif isinstance(domain, Stadium):
        hit = _batch_stadium(domain, P.copy(), D.copy(), prims, L)
    else:
        raise RayError("geometric_control_check supports torus and stadium domains")
    frac = float(np.mean(~np.isnan(hit)))
    samples = np.column_stack([X, Y, TH])
    return frac, hit, samples


def _batch_prims_entry(prims, P, D, t_max, torus):
    """Vectorized first-entry times (inf where none) for all trajectories."""
    M = P.shape[0]
    best = np.full(M, np.inf)
    offsets = [(ox, oy) for ox in (-1.0, 0.0, 1.0) for oy in (-1.0, 0.0, 1.0)] if torus else [(0.0, 0.0)]
    for prim in prims:
        for ox, oy in offsets:
            px = P[:, 0] - ox
            py = P[:, 1] - oy
            if isinstance(prim, AnnulusRegion):
                inside = prim.contains(px, py)
                best = np.where(inside, 0.0, best)
                ex = px - prim.center[0]
                ey = py - prim.center[1]
                b = ex * D[:, 0] + ey * D[:, 1]
                q2 = ex * ex + ey * ey
                for r in ((prim.r_out,) if prim.r_in == 0 else (prim.r_out, prim.r_in)):
                    disc = b * b - (q2 - r * r)
                    ok = disc >= 0
                    sq = np.sqrt(np.where(ok, disc, 0.0))
                    for tc in (-b - sq, -b + sq):
                        valid = ok & (tc > 1e-12) & (tc <= t_max)
                        probe_x = px + (tc + 1e-9) * D[:, 0]
                        probe_y = py + (tc + 1e-9) * D[:, 1]
                        valid &= prim.contains(probe_x, probe_y)
                        best = np.where(valid & (tc < best), tc, best)
            elif isinstance(prim, RectRegion):
                t_lo = np.zeros(M)
                t_hi = np.full(M, t_max, dtype=float)
                feas = np.ones(M, dtype=bool)
                for lo, hi, pos, vel in (
                    (prim.x0, prim.x1, px, D[:, 0]),
                    (prim.y0, prim.y1, py, D[:, 1]),
                ):
                    par = np.abs(vel) < 1e-15
                    inside_slab = (pos > lo) & (pos < hi)
                    feas &= ~par | inside_slab
                    with np.errstate(divide="ignore", invalid="ignore"):
                        ta = (lo - pos) / vel
                        tb = (hi - pos) / vel
                    lo_t = np.minimum(ta, tb)
                    hi_t = np.maximum(ta, tb)
                    t_lo = np.where(par, t_lo, np.maximum(t_lo, lo_t))
                    t_hi = np.where(par, t_hi, np.minimum(t_hi, hi_t))
                ok = feas & (t_lo < t_hi - 1e-15)
                best = np.where(ok & (t_lo < best), np.maximum(t_lo, 0.0), best)
            else:
                raise RayError(f"unsupported region primitive {type(prim)!r}")
    return best


def _batch_torus(domain, P, D, prims, L):
    ob = domain.obstacle
    if ob is None:
        ob = Disc((0.5, 0.5), 1e-300)  # degenerate: never hit
    if not isinstance(ob, Disc):
        raise RayError("batched torus control check requires a disc obstacle")
    M = P.shape[0]
    t_used = np.zeros(M)
    hit_time = np.full(M, np.nan)
    alive = np.ones(M, dtype=bool)
    max_steps = int(8 * L * math.sqrt(2)) + 64
    for _ in range(max_steps):
        if not alive.any():
            break
        idx = np.where(alive)[0]
        p = P[idx]
        d = D[idx]
        cell = np.floor(p + 1e-12 * d)
        pr = p - cell  # reduced to [0,1)^2
        with np.errstate(divide="ignore"):
            tx = np.where(d[:, 0] > 1e-15, (1.0 - pr[:, 0]) / d[:, 0],
                          np.where(d[:, 0] < -1e-15, -pr[:, 0] / d[:, 0], np.inf))
            ty = np.where(d[:, 1] > 1e-15, (1.0 - pr[:, 1]) / d[:, 1],
                          np.where(d[:, 1] < -1e-15, -pr[:, 1] / d[:, 1], np.inf))
        t_cell = np.minimum(tx, ty)
        t_rem = L - t_used[idx]
        t_seg = np.minimum(t_cell, t_rem)
        # obstacle in the local cell
        ex = pr[:, 0] - ob.center[0]
        ey = pr[:, 1] - ob.center[1]
        b = ex * d[:, 0] + ey * d[:, 1]
        q = ex * ex + ey * ey - ob.radius**2
        disc = b * b - q
        okh = disc >= 0
        sq = np.sqrt(np.where(okh, disc, 0.0))
        t1 = -b - sq
        t2 = -b + sq
        t_ob = np.where(okh & (t1 > 1e-12), t1, np.where(okh & (t2 > 1e-12), t2, np.inf))
        t_ob = np.where(t_ob <= t_seg, t_ob, np.inf)
        # region entry within this segment
        t_reg = _batch_prims_entry(prims, pr, d, np.minimum(t_seg, t_rem), torus=True)
        t_reg = np.where(t_reg <= np.minimum(t_ob, t_seg), t_reg, np.inf)

        hit_now = np.isfinite(t_reg)
        hit_time[idx[hit_now]] = t_used[idx[hit_now]] + t_reg[hit_now]
        alive[idx[hit_now]] = False

        go = ~hit_now
        reflect = go & np.isfinite(t_ob)
        adv = np.where(reflect, t_ob, t_seg)
        P[idx[go]] = p[go] + adv[go, None] * d[go]
        t_used[idx[go]] += adv[go]
        if reflect.any():
            j = idx[reflect]
            hp = (p[reflect] + adv[reflect, None] * d[reflect]) - cell[reflect]
            nx = hp[:, 0] - ob.center[0]
            ny = hp[:, 1] - ob.center[1]
            nn = np.hypot(nx, ny)
            nx /= nn
            ny /= nn
            dd = D[j]
            dot = dd[:, 0] * nx + dd[:, 1] * ny
            D[j, 0] = dd[:, 0] - 2 * dot * nx
            D[j, 1] = dd[:, 1] - 2 * dot * ny
        done = alive & (t_used >= L - 1e-12)
        alive &= ~done
    return hit_time


def _batch_stadium(domain, P, D, prims, L):
    a = domain.a
    r = domain.wing_radius
    M = P.shape[0]
    t_used = np.zeros(M)
    hit_time = np.full(M, np.nan)
    alive = np.ones(M, dtype=bool)
    max_steps = int(8 * L / a) + 256
    for _ in range(max_steps):
        if not alive.any():
            break
        idx = np.where(alive)[0]
        p = P[idx]
        d = D[idx]
        t_rem = L - t_used[idx]
        m = len(idx)
        t_wall = np.full(m, np.inf)
        n_wall = np.zeros((m, 2))
        # horizontal walls, valid only for 0 <= x_hit <= 1
        for yline, ny in ((a, -1.0), (0.0, 1.0)):
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (yline - p[:, 1]) / d[:, 1]
            xh = p[:, 0] + t * d[:, 0]
            ok = np.isfinite(t) & (t > 1e-12) & (xh >= 0) & (xh <= 1) & (np.sign(d[:, 1]) == -ny)
            upd = ok & (t < t_wall)
            t_wall[upd] = t[upd]
            n_wall[upd] = (0.0, ny)
        # arcs
        for cx, side in ((0.0, -1), (1.0, +1)):
            ex = p[:, 0] - cx
            ey = p[:, 1] - a / 2.0
            b = ex * d[:, 0] + ey * d[:, 1]
            q = ex * ex + ey * ey - r * r
            disc = b * b - q
            ok = disc >= 0
            sq = np.sqrt(np.where(ok, disc, 0.0))
            for t in (-b - sq, -b + sq):
                xh = p[:, 0] + t * d[:, 0]
                side_ok = (xh <= 1e-12) if side < 0 else (xh >= 1 - 1e-12)
                upd = ok & (t > 1e-12) & side_ok & (t < t_wall)
                if upd.any():
                    hx = p[upd, 0] + t[upd] * d[upd, 0]
                    hy = p[upd, 1] + t[upd] * d[upd, 1]
                    t_wall[upd] = t[upd]
                    n_wall[upd, 0] = (hx - cx) / r
                    n_wall[upd, 1] = (hy - a / 2.0) / r
        t_seg = np.minimum(t_wall, t_rem)
        t_reg = _batch_prims_entry(prims, p, d, t_seg, torus=False)
        t_reg = np.where(t_reg <= t_seg, t_reg, np.inf)

        hit_now = np.isfinite(t_reg)
        hit_time[idx[hit_now]] = t_used[idx[hit_now]] + t_reg[hit_now]
        alive[idx[hit_now]] = False

        go = ~hit_now
        reflect = go & (t_wall < t_rem)
        adv = np.where(reflect, t_wall, t_rem)
        P[idx[go]] = p[go] + adv[go, None] * d[go]
        t_used[idx[go]] += adv[go]
        if reflect.any():
            j = idx[reflect]
            nn = n_wall[reflect]
            nn = nn / np.hypot(nn[:, 0], nn[:, 1])[:, None]
            dd = D[j]
            dot = dd[:, 0] * nn[:, 0] + dd[:, 1] * nn[:, 1]
            D[j, 0] = dd[:, 0] - 2 * dot * nn[:, 0]
            D[j, 1] = dd[:, 1] - 2 * dot * nn[:, 1]
        done = alive & (t_used >= L - 1e-12)
        alive &= ~done
    return hit_time
