"""Billiard domains with rectangular components.

Five domain families, all living in dimensionless unit-scale coordinates:

* ``Rectangle``     -- [0,1] x [0,a] with per-axis boundary conditions.
* ``Stadium``       -- the rectangle [0,1] x [0,a] plus two half-disc wings of
                       radius a/2 glued to the x=0 and x=1 sides.
* ``TorusMinusObstacle`` -- the unit square torus with a convex (or merely
                       simple-polygonal) obstacle removed.
* ``SquareMinusObstacle`` -- the unit square with an interior obstacle, outer
                       boundary Dirichlet or Neumann.
* ``Barrier``        -- a rectangle with an interior slit segment along a grid
                       line (pseudointegrable billiard).

Every partially rectangular domain exposes its rectangle R = [0,1] x [0,a] and
the decomposition of dR into the pair of horizontal sides ("gamma2", on the
outer boundary) and the pair of vertical sides ("gamma1").  Control regions are
unions of axis-aligned rectangles, annuli, and distance-neighborhoods of named
boundary pieces; the latter resolve to rectangle/annulus primitives so that the
ray tracer can compute exact entry times.

``maximal_rectangle`` constructs, for a rational direction (p,q) on the torus,
the widest flat corridor around the closed geodesic through a seed point whose
interior avoids the obstacle.  The geodesic lifts to the family of parallel
lines with normal offsets on the lattice (1/L)Z, L = sqrt(p^2+q^2), so the
corridor half-width is the distance from that offset lattice to the obstacle,
computable in closed form for discs and polygon edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GeometryError",
    "Disc",
    "Polygon",
    "Segment",
    "Arc",
    "Rectangle",
    "Stadium",
    "TorusMinusObstacle",
    "SquareMinusObstacle",
    "Barrier",
    "RectRegion",
    "AnnulusRegion",
    "BoundaryNeighborhood",
    "Region",
    "Corridor",
    "classify_boundary",
    "region_mask",
    "maximal_rectangle",
]


class GeometryError(ValueError):
    """Invalid geometric construction or query."""


# ---------------------------------------------------------------------------
# obstacles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("disc radius must be positive")

    def contains(self, x, y):
        """True strictly inside the open disc (vectorized)."""
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 < self.radius**2

    def boundary_distance(self, x, y):
        """Distance to the bounding circle (vectorized, sign-free)."""
        d = np.hypot(x - self.center[0], y - self.center[1])
        return np.abs(d - self.radius)

    def bbox(self):
        cx, cy = self.center
        r = self.radius
        return cx - r, cx + r, cy - r, cy + r


@dataclass(frozen=True)
class Polygon:
    """Simple (non-self-intersecting) polygon; vertices in order."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        if self._self_intersects():
            raise GeometryError("polygon is not simple")

    def _edges(self):
        v = self.vertices
        return [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]

    def _self_intersects(self):
        edges = self._edges()
        n = len(edges)
        for i in range(n):
            for j in range(i + 1, n):
                if j == i or (j + 1) % n == i or (i + 1) % n == j:
                    continue  # shared-vertex neighbors
                if _segments_cross(*edges[i], *edges[j]):
                    return True
        return False

    def contains(self, x, y):
        """Even-odd rule point-in-polygon test (vectorized)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        inside = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        v = np.asarray(self.vertices, dtype=float)
        xa, ya = v[:, 0], v[:, 1]
        xb, yb = np.roll(xa, -1), np.roll(ya, -1)
        for k in range(len(xa)):
            cond = (ya[k] > y) != (yb[k] > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xint = xa[k] + (y - ya[k]) * (xb[k] - xa[k]) / (yb[k] - ya[k])
            inside ^= cond & (x < xint)
        return inside if inside.shape else bool(inside)

    def boundary_distance(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        best = None
        for (ax, ay), (bx, by) in self._edges():
            d = _point_segment_distance(x, y, ax, ay, bx, by)
            best = d if best is None else np.minimum(best, d)
        return best

    def bbox(self):
        v = np.asarray(self.vertices)
        return v[:, 0].min(), v[:, 0].max(), v[:, 1].min(), v[:, 1].max()


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _point_segment_distance(x, y, ax, ay, bx, by):
    ex, ey = bx - ax, by - ay
    L2 = ex * ex + ey * ey
    if L2 == 0:
        return np.hypot(x - ax, y - ay)
    t = np.clip(((x - ax) * ex + (y - ay) * ey) / L2, 0.0, 1.0)
    return np.hypot(x - (ax + t * ex), y - (ay + t * ey))


# ---------------------------------------------------------------------------
# boundary primitives (for classification and neighborhoods)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    a: tuple[float, float]
    b: tuple[float, float]

    def distance(self, x, y):
        return _point_segment_distance(
            np.asarray(x, float), np.asarray(y, float), self.a[0], self.a[1], self.b[0], self.b[1]
        )


@dataclass(frozen=True)
class Arc:
    """Circular arc, angles in radians counterclockwise from theta0 to theta1."""

    center: tuple[float, float]
    radius: float
    theta0: float
    theta1: float

    def distance(self, x, y):
        dx = np.asarray(x, float) - self.center[0]
        dy = np.asarray(y, float) - self.center[1]
        theta = np.arctan2(dy, dx)
        span = (theta - self.theta0) % (2 * math.pi)
        width = (self.theta1 - self.theta0) % (2 * math.pi)
        on_arc = span <= width
        d_radial = np.abs(np.hypot(dx, dy) - self.radius)
        e0 = (self.center[0] + self.radius * math.cos(self.theta0),
              self.center[1] + self.radius * math.sin(self.theta0))
        e1 = (self.center[0] + self.radius * math.cos(self.theta1),
              self.center[1] + self.radius * math.sin(self.theta1))
        d_ends = np.minimum(np.hypot(x - e0[0], y - e0[1]), np.hypot(x - e1[0], y - e1[1]))
        return np.where(on_arc, d_radial, d_ends)


def _obstacle_boundary_distance_torus(obstacle, x, y):
    """Distance to the obstacle boundary with torus min-image reduction."""
    # obstacle closure is strictly inside (0,1)^2, so after reducing the query
    # point mod 1 the plain distance is correct except near the seam; take the
    # min over the 3x3 image block of the query point to be safe.
    x = np.asarray(x, float) % 1.0
    y = np.asarray(y, float) % 1.0
    best = None
    for ox in (-1.0, 0.0, 1.0):
        for oy in (-1.0, 0.0, 1.0):
            d = obstacle.boundary_distance(x + ox, y + oy)
            best = d if best is None else np.minimum(best, d)
    return best


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

_BC = ("dirichlet", "neumann", "periodic")


def _check_bc(bc, allowed=("dirichlet", "neumann")):
    if bc not in allowed:
        raise GeometryError(f"unsupported boundary condition {bc!r} (allowed: {allowed})")


@dataclass(frozen=True)
class Rectangle:
    """R = [0,1]_x x [0,a]_y.  gamma1 = vertical sides, gamma2 = horizontal."""

    a: float = 1.0
    bc_x: str = "dirichlet"
    bc_y: str = "dirichlet"

    def __post_init__(self):
        if self.a <= 0:
            raise GeometryError("rectangle height a must be positive")
        _check_bc(self.bc_x, _BC)
        _check_bc(self.bc_y, _BC)

    periodic = (False, False)

    def bounding_box(self):
        return 0.0, 1.0, 0.0, self.a

    def rect_part(self):
        return 0.0, 1.0, 0.0, self.a

    def contains(self, x, y):
        return (np.asarray(x) > 0) & (np.asarray(x) < 1) & (np.asarray(y) > 0) & (np.asarray(y) < self.a)

    def boundary_pieces(self):
        a = self.a
        return {
            "gamma1": [Segment((0, 0), (0, a)), Segment((1, 0), (1, a))],
            "gamma2": [Segment((0, 0), (1, 0)), Segment((0, a), (1, a))],
        }


@dataclass(frozen=True)
class Stadium:
    """Rectangle [0,1] x [0,a] with half-disc wings of radius a/2 on both ends.

    The horizontal sides (gamma2) lie on the outer boundary; the vertical
    sides (gamma1) are interior interfaces between the rectangle and the wings.
    """

    a: float = 1.0
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.a <= 0:
            raise GeometryError("stadium height a must be positive")
        _check_bc(self.bc)

    periodic = (False, False)

    @property
    def wing_radius(self):
        return self.a / 2.0

    def bounding_box(self):
        r = self.wing_radius
        return -r, 1.0 + r, 0.0, self.a

    def rect_part(self):
        return 0.0, 1.0, 0.0, self.a

    def contains(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        r = self.wing_radius
        cy = self.a / 2.0
        in_rect = (x >= 0) & (x <= 1) & (y > 0) & (y < self.a)
        in_left = (x < 0) & (x**2 + (y - cy) ** 2 < r**2)
        in_right = (x > 1) & ((x - 1) ** 2 + (y - cy) ** 2 < r**2)
        return in_rect | in_left | in_right

    def boundary_pieces(self):
        a = self.a
        cy = a / 2.0
        r = self.wing_radius
        return {
            "gamma1": [Segment((0, 0), (0, a)), Segment((1, 0), (1, a))],
            "gamma2": [Segment((0, 0), (1, 0)), Segment((0, a), (1, a))],
            "arc": [
                Arc((0, cy), r, math.pi / 2, 3 * math.pi / 2),
                Arc((1, cy), r, -math.pi / 2, math.pi / 2),
            ],
        }


def _check_obstacle_inside_unit(obstacle, margin=1e-9):
    x0, x1, y0, y1 = obstacle.bbox()
    if not (x0 > margin and y0 > margin and x1 < 1 - margin and y1 < 1 - margin):
        raise GeometryError("obstacle closure must lie strictly inside the unit cell")


@dataclass(frozen=True)
class TorusMinusObstacle:
    """Unit square torus with an obstacle removed (Sinai-type billiard).

    ``obstacle=None`` gives the plain torus (the degenerate no-obstacle case).
    """

    obstacle: Disc | Polygon | None = Disc((0.5, 0.5), 0.25)
    obstacle_bc: str = "dirichlet"

    def __post_init__(self):
        if self.obstacle is not None:
            _check_obstacle_inside_unit(self.obstacle)
        _check_bc(self.obstacle_bc)

    periodic = (True, True)

    def bounding_box(self):
        return 0.0, 1.0, 0.0, 1.0

    def contains(self, x, y):
        x = np.asarray(x, float) % 1.0
        y = np.asarray(y, float) % 1.0
        if self.obstacle is None:
            return np.ones(np.broadcast(x, y).shape, dtype=bool) if np.ndim(x) or np.ndim(y) else True
        return ~self._in_closed_obstacle(x, y)

    def _in_closed_obstacle(self, x, y):
        if isinstance(self.obstacle, Disc):
            cx, cy = self.obstacle.center
            return (x - cx) ** 2 + (y - cy) ** 2 <= self.obstacle.radius**2
        return self.obstacle.contains(x, y) | (self.obstacle.boundary_distance(x, y) <= 1e-12)

    def boundary_pieces(self):
        if self.obstacle is None:
            return {}
        if isinstance(self.obstacle, Disc):
            return {"obstacle": [Arc(self.obstacle.center, self.obstacle.radius, 0.0, 2 * math.pi)]}
        return {"obstacle": [Segment(a, b) for a, b in self.obstacle._edges()]}


@dataclass(frozen=True)
class SquareMinusObstacle:
    """Unit square with an interior obstacle; outer bc Dirichlet or Neumann."""

    obstacle: Disc | Polygon = Disc((0.5, 0.5), 0.25)
    outer_bc: str = "dirichlet"
    obstacle_bc: str = "dirichlet"

    def __post_init__(self):
        _check_obstacle_inside_unit(self.obstacle)
        _check_bc(self.outer_bc)
        _check_bc(self.obstacle_bc)

    periodic = (False, False)

    def bounding_box(self):
        return 0.0, 1.0, 0.0, 1.0

    def rect_part(self):
        return 0.0, 1.0, 0.0, 1.0

    def contains(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        in_sq = (x > 0) & (x < 1) & (y > 0) & (y < 1)
        if isinstance(self.obstacle, Disc):
            cx, cy = self.obstacle.center
            in_ob = (x - cx) ** 2 + (y - cy) ** 2 <= self.obstacle.radius**2
        else:
            in_ob = self.obstacle.contains(x, y) | (self.obstacle.boundary_distance(x, y) <= 1e-12)
        return in_sq & ~in_ob

    def outer_contains(self, x, y):
        """Inside the outer square, ignoring the obstacle."""
        return (np.asarray(x) > 0) & (np.asarray(x) < 1) & (np.asarray(y) > 0) & (np.asarray(y) < 1)

    def boundary_pieces(self):
        pieces = {
            "outer_square": [
                Segment((0, 0), (1, 0)),
                Segment((1, 0), (1, 1)),
                Segment((1, 1), (0, 1)),
                Segment((0, 1), (0, 0)),
            ]
        }
        if isinstance(self.obstacle, Disc):
            pieces["obstacle"] = [Arc(self.obstacle.center, self.obstacle.radius, 0.0, 2 * math.pi)]
        else:
            pieces["obstacle"] = [Segment(a, b) for a, b in self.obstacle._edges()]
        return pieces


@dataclass(frozen=True)
class Barrier:
    """Rectangle [0,1] x [0,a] with a zero-width interior slit at x = slit_x.

    The slit is a Dirichlet segment along a grid line from (slit_x, slit_y0)
    to (slit_x, slit_y1); nodes on the slit are excluded from the grid.
    """

    a: float = 1.0
    slit_x: float = 0.5
    slit_y0: float = 0.0
    slit_y1: float = 0.5
    bc: str = "dirichlet"

    def __post_init__(self):
        if self.a <= 0:
            raise GeometryError("barrier height must be positive")
        if not (0 < self.slit_x < 1):
            raise GeometryError("slit must be interior in x")
        if not (0 <= self.slit_y0 < self.slit_y1 <= self.a):
            raise GeometryError("slit endpoints must satisfy 0 <= y0 < y1 <= a")
        _check_bc(self.bc)

    periodic = (False, False)

    def bounding_box(self):
        return 0.0, 1.0, 0.0, self.a

    def rect_part(self):
        return 0.0, 1.0, 0.0, self.a

    def contains(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        in_rect = (x > 0) & (x < 1) & (y > 0) & (y < self.a)
        on_slit = (np.abs(x - self.slit_x) < 1e-12) & (y >= self.slit_y0 - 1e-12) & (y <= self.slit_y1 + 1e-12)
        return in_rect & ~on_slit

    def boundary_pieces(self):
        a = self.a
        return {
            "gamma1": [Segment((0, 0), (0, a)), Segment((1, 0), (1, a))],
            "gamma2": [Segment((0, 0), (1, 0)), Segment((0, a), (1, a))],
            "obstacle": [Segment((self.slit_x, self.slit_y0), (self.slit_x, self.slit_y1))],
        }


# priority for resolving ambiguous (corner) classifications
_LABEL_PRIORITY = ("obstacle", "gamma1", "gamma2", "outer_square", "arc")


def classify_boundary(domain, p, tol):
    """Label of the boundary piece within ``tol`` of ``p``, or None.

    Corner ambiguities resolve by fixed priority obstacle > gamma1 > gamma2 >
    outer_square > arc.  Torus coordinates are reduced mod 1 (closeness to the
    obstacle is measured through min-image distance).
    """
    if tol <= 0:
        raise GeometryError("tol must be positive")
    x, y = float(p[0]), float(p[1])
    pieces = domain.boundary_pieces()
    hits = {}
    for label, prims in pieces.items():
        if getattr(domain, "periodic", (False, False))[0]:
            d = min(
                float(np.min(prim.distance((x % 1.0) + ox, (y % 1.0) + oy)))
                for prim in prims
                for ox in (-1.0, 0.0, 1.0)
                for oy in (-1.0, 0.0, 1.0)
            )
        else:
            d = min(float(np.min(prim.distance(x, y))) for prim in prims)
        if d <= tol:
            hits[label] = d
    if not hits:
        return None
    for label in _LABEL_PRIORITY:
        if label in hits:
            return label
    return min(hits, key=hits.get)


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RectRegion:
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise GeometryError("rectangle region must have positive extent")

    def contains(self, x, y):
        return (x > self.x0) & (x < self.x1) & (y > self.y0) & (y < self.y1)


@dataclass(frozen=True)
class AnnulusRegion:
    """{ r_in < dist(x, center) < r_out }; r_in = 0 gives a disc."""

    center: tuple[float, float]
    r_in: float
    r_out: float

    def __post_init__(self):
        if not (0 <= self.r_in < self.r_out):
            raise GeometryError("annulus needs 0 <= r_in < r_out")

    def contains(self, x, y):
        d2 = (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2
        return (d2 > self.r_in**2) & (d2 < self.r_out**2)


@dataclass(frozen=True)
class BoundaryNeighborhood:
    """{ x in domain : dist(x, piece) < delta } for a named boundary piece."""

    piece: str
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise GeometryError("neighborhood width delta must be positive")

    def resolve(self, domain):
        pieces = domain.boundary_pieces()
        if self.piece not in pieces:
            raise GeometryError(f"domain has no boundary piece {self.piece!r}")
        out = []
        d = self.delta
        for prim in pieces[self.piece]:
            if isinstance(prim, Segment):
                (ax, ay), (bx, by) = prim.a, prim.b
                if abs(ax - bx) < 1e-14:  # vertical
                    y0, y1 = sorted((ay, by))
                    out.append(RectRegion(ax - d, ax + d, y0, y1))
                elif abs(ay - by) < 1e-14:  # horizontal
                    x0, x1 = sorted((ax, bx))
                    out.append(RectRegion(x0, x1, ay - d, ay + d))
                else:
                    raise GeometryError("only axis-aligned segment neighborhoods are supported")
                out.append(AnnulusRegion((ax, ay), 0.0, d))
                out.append(AnnulusRegion((bx, by), 0.0, d))
            elif isinstance(prim, Arc):
                full = abs((prim.theta1 - prim.theta0) % (2 * math.pi)) < 1e-12
                if not full:
                    raise GeometryError("neighborhoods of partial arcs are not supported")
                out.append(AnnulusRegion(prim.center, max(prim.radius - d, 0.0), prim.radius + d))
            else:
                raise GeometryError(f"unsupported boundary primitive {type(prim)!r}")
        return out


@dataclass(frozen=True)
class Region:
    """Union of region primitives (rectangles, annuli, boundary neighborhoods)."""

    parts: tuple

    def __post_init__(self):
        if len(self.parts) == 0:
            raise GeometryError("region must have at least one part")

    @staticmethod
    def of(*parts):
        return Region(tuple(parts))

    @staticmethod
    def whole(domain):
        x0, x1, y0, y1 = domain.bounding_box()
        pad = 1e-9 + 0.5 * (x1 - x0)
        return Region((RectRegion(x0 - pad, x1 + pad, y0 - pad, y1 + pad),))

    def resolve(self, domain):
        out = []
        for part in self.parts:
            if isinstance(part, BoundaryNeighborhood):
                out.extend(part.resolve(domain))
            else:
                out.append(part)
        return out

    def contains(self, domain, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        torus = getattr(domain, "periodic", (False, False))[0]
        mask = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for prim in self.resolve(domain):
            if torus:
                xr = x % 1.0
                yr = y % 1.0
                for ox in (-1.0, 0.0, 1.0):
                    for oy in (-1.0, 0.0, 1.0):
                        mask |= prim.contains(xr + ox, yr + oy)
            else:
                mask |= prim.contains(x, y)
        return mask


def region_mask(domain, region, grid):
    """Boolean mask of interior grid nodes lying in the region.

    Raises GeometryError when the region has no grid support.
    """
    X, Y = grid.node_mesh()
    mask = region.contains(domain, X, Y) & grid.interior
    if not mask.any():
        raise GeometryError("region has no grid support")
    return mask


# ---------------------------------------------------------------------------
# maximal rectangle (obstacle-avoiding corridor) in a rational direction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Corridor:
    """Flat strip around a closed geodesic of rational direction on the torus.

    ``point(t, s)`` maps corridor coordinates (t along the geodesic, s across)
    to torus points; the strip is { |s| < half_width } with t periodic of
    period ``period``.
    """

    seed: tuple[float, float]
    direction: tuple[int, int]
    unit_dir: tuple[float, float]
    unit_normal: tuple[float, float]
    half_width: float
    period: float

    def point(self, t, s):
        t = np.asarray(t, float)
        s = np.asarray(s, float)
        x = self.seed[0] + t * self.unit_dir[0] + s * self.unit_normal[0]
        y = self.seed[1] + t * self.unit_dir[1] + s * self.unit_normal[1]
        return x % 1.0, y % 1.0

    def signed_offset(self, x, y):
        """Perpendicular distance (signed, lattice-reduced) from the geodesic."""
        raw = (np.asarray(x, float) - self.seed[0]) * self.unit_normal[0] + (
            np.asarray(y, float) - self.seed[1]
        ) * self.unit_normal[1]
        spacing = 1.0 / self.period
        return raw - np.round(raw / spacing) * spacing

    def contains(self, x, y):
        return np.abs(self.signed_offset(x, y)) < self.half_width


def _offset_lattice_distance(value, spacing):
    """Distance from ``value`` to the lattice spacing*Z."""
    r = value / spacing
    return abs(r - round(r)) * spacing


def maximal_rectangle(domain, direction, seed):
    """Widest obstacle-avoiding flat corridor around the (p,q) geodesic.

    The direction is an integer pair, reduced to primitive form.  Errors if
    the geodesic through ``seed`` meets the obstacle closure (no corridor).
    Maximality: inflating half_width by any eps > 0 meets the obstacle.
    """
    if not isinstance(domain, TorusMinusObstacle) or domain.obstacle is None:
        raise GeometryError("maximal_rectangle requires a torus domain with an obstacle")
    p, q = int(direction[0]), int(direction[1])
    if p == 0 and q == 0:
        raise GeometryError("direction must be nonzero")
    g = math.gcd(abs(p), abs(q))
    p //= g
    q //= g
    L = math.hypot(p, q)
    u = (p / L, q / L)
    nvec = (-q / L, p / L)
    spacing = 1.0 / L
    sx, sy = float(seed[0]), float(seed[1])
    offset0 = sx * nvec[0] + sy * nvec[1]

    ob = domain.obstacle
    if isinstance(ob, Disc):
        oc = ob.center[0] * nvec[0] + ob.center[1] * nvec[1]
        dist = _offset_lattice_distance(oc - offset0, spacing) - ob.radius
    else:
        dist = math.inf
        for (ax, ay), (bx, by) in ob._edges():
            oa = ax * nvec[0] + ay * nvec[1] - offset0
            obv = bx * nvec[0] + by * nvec[1] - offset0
            lo, hi = sorted((oa / spacing, obv / spacing))
            if math.floor(hi) >= math.ceil(lo):
                dist = 0.0  # an offset-lattice line crosses this edge
                break
            k = math.floor(lo)
            dist = min(dist, min(lo - k, (k + 1) - hi) * spacing)
    if dist <= 1e-12:
        raise GeometryError("no avoiding corridor through seed")
    return Corridor(
        seed=(sx, sy),
        direction=(p, q),
        unit_dir=u,
        unit_normal=nvec,
        half_width=float(dist),
        period=float(L),
    )
