import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from billiardlab import geometry as g
from billiardlab.discretize import build_grid


class TestContains:
    def test_torus_obstacle_center(self, sinai_domain):
        assert not sinai_domain.contains(0.5, 0.5)

    def test_torus_corner(self, sinai_domain):
        assert sinai_domain.contains(0.0, 0.0)

    def test_stadium_wing_point(self):
        assert g.Stadium(a=1.0).contains(-0.4, 0.5)

    def test_stadium_outside(self):
        st_dom = g.Stadium(a=1.0)
        assert not st_dom.contains(-0.6, 0.5)
        assert not st_dom.contains(0.5, 1.1)

    @settings(max_examples=50, deadline=None)
    @given(
        x=st.floats(-2, 3, allow_nan=False),
        y=st.floats(-2, 3, allow_nan=False),
        sx=st.integers(-2, 2),
        sy=st.integers(-2, 2),
    )
    def test_torus_periodicity(self, x, y, sx, sy):
        dom = g.TorusMinusObstacle(g.Disc((0.5, 0.5), 0.25))
        assert bool(dom.contains(x, y)) == bool(dom.contains(x + sx, y + sy))


class TestClassifyBoundary:
    def test_stadium_gamma1(self):
        assert g.classify_boundary(g.Stadium(a=1.0), (0, 0.5), 1e-9) == "gamma1"

    def test_stadium_gamma2(self):
        assert g.classify_boundary(g.Stadium(a=1.0), (0.5, 0), 1e-9) == "gamma2"

    def test_torus_obstacle(self, sinai_domain):
        assert g.classify_boundary(sinai_domain, (0.75, 0.5), 1e-9) == "obstacle"

    def test_none_for_interior(self, sinai_domain):
        assert g.classify_boundary(sinai_domain, (0.1, 0.1), 1e-9) is None

    def test_corner_priority(self):
        # stadium corner (0, 0) lies on gamma1, gamma2, and the arc
        assert g.classify_boundary(g.Stadium(a=1.0), (0.0, 0.0), 1e-9) == "gamma1"

    def test_stadium_arc_label(self):
        assert g.classify_boundary(g.Stadium(a=1.0), (-0.5, 0.5), 1e-9) == "arc"

    def test_square_outer(self):
        dom = g.SquareMinusObstacle(g.Disc((0.5, 0.5), 0.25))
        assert g.classify_boundary(dom, (0.0, 0.3), 1e-9) == "outer_square"

    def test_tol_must_be_positive(self, sinai_domain):
        with pytest.raises(g.GeometryError):
            g.classify_boundary(sinai_domain, (0.5, 0.5), 0.0)


class TestRegions:
    def test_whole_domain_mask_is_interior(self, sinai_domain):
        grid = build_grid(sinai_domain, 32)
        mask = g.region_mask(sinai_domain, g.Region.whole(sinai_domain), grid)
        assert np.array_equal(mask, grid.interior)

    def test_degenerate_annulus_rejected(self):
        with pytest.raises(g.GeometryError):
            g.AnnulusRegion((0.5, 0.5), 0.2, 0.2)

    def test_empty_mask_raises(self, sinai_domain):
        grid = build_grid(sinai_domain, 32)
        # annulus strictly inside the obstacle: no interior nodes
        region = g.Region.of(g.AnnulusRegion((0.5, 0.5), 0.01, 0.05))
        with pytest.raises(g.GeometryError, match="no grid support"):
            g.region_mask(sinai_domain, region, grid)

    def test_gamma1_neighborhood_area_oracle(self):
        # staircase area against a 10x finer quadrature oracle
        dom = g.Stadium(a=1.0)
        grid = build_grid(dom, 128)
        region = g.Region.of(g.BoundaryNeighborhood("gamma1", 0.1))
        mask = g.region_mask(dom, region, grid)
        area = float(mask.sum()) * grid.h**2
        hf = grid.h / 10.0
        xs = np.arange(-0.5 + hf / 2, 1.5, hf)
        ys = np.arange(hf / 2, 1.0, hf)
        XF, YF = np.meshgrid(xs, ys, indexing="ij")
        fine = region.contains(dom, XF, YF) & np.asarray(dom.contains(XF, YF))
        area_oracle = float(fine.sum()) * hf**2
        assert abs(area - area_oracle) <= 3 * grid.h

    def test_region_area_first_order_convergence(self):
        dom = g.Stadium(a=1.0)
        region = g.Region.of(g.BoundaryNeighborhood("gamma1", 0.1))
        errs = []
        # reference from very fine sampling
        href = 1.0 / 1025
        xs = np.arange(-0.5 + href / 2, 1.5, href)
        ys = np.arange(href / 2, 1.0, href)
        XF, YF = np.meshgrid(xs, ys, indexing="ij")
        ref = float((region.contains(dom, XF, YF) & np.asarray(dom.contains(XF, YF))).sum()) * href**2
        for res in (32, 64, 128):
            grid = build_grid(dom, res)
            mask = g.region_mask(dom, region, grid)
            errs.append(abs(float(mask.sum()) * grid.h**2 - ref))
        for err, res in zip(errs, (32, 64, 128)):
            assert err <= 3.0 / (res + 1)

    def test_unsupported_segment_orientation(self):
        with pytest.raises(g.GeometryError):
            g.BoundaryNeighborhood("obstacle", 0.05).resolve(
                g.TorusMinusObstacle(g.Polygon(((0.4, 0.4), (0.6, 0.45), (0.5, 0.6))))
            )


class TestMaximalRectangle:
    def test_axis_direction_tangency(self):
        dom = g.TorusMinusObstacle(g.Disc((0.5, 0.5), 0.2))
        cor = g.maximal_rectangle(dom, (1, 0), (0.0, 0.0))
        assert cor.half_width == pytest.approx(0.3, abs=1e-12)
        assert cor.period == pytest.approx(1.0, abs=1e-12)

    def test_large_obstacle_narrow_corridor(self):
        dom = g.TorusMinusObstacle(g.Disc((0.5, 0.5), 0.45))
        cor = g.maximal_rectangle(dom, (1, 0), (0.0, 0.0))
        assert cor.half_width == pytest.approx(0.05, abs=1e-12)

    def test_diagonal_against_inflation_oracle(self):
        dom = g.TorusMinusObstacle(g.Disc((0.5, 0.5), 0.2))
        cor = g.maximal_rectangle(dom, (1, 1), (0.0, 0.5))
        assert cor.period == pytest.approx(math.sqrt(2), abs=1e-12)
        # brute-force inflation oracle in steps of 1e-4
        ts = np.linspace(0.0, cor.period, 4000, endpoint=False)
        w = 1e-4
        while w < 0.8:
            hit = False
            for s in (+w, -w):
                xs, ys = cor.point(ts, np.full_like(ts, s))
                if dom._in_closed_obstacle(xs, ys).any():
                    hit = True
                    break
            if hit:
                break
            w += 1e-4
        assert cor.half_width == pytest.approx(w - 1e-4, abs=2e-4)

    def test_blocked_seed_raises(self):
        dom = g.TorusMinusObstacle(g.Disc((0.5, 0.5), 0.2))
        with pytest.raises(g.GeometryError, match="no avoiding corridor"):
            g.maximal_rectangle(dom, (1, 0), (0.0, 0.5))

    def test_zero_direction_raises(self, sinai_domain):
        with pytest.raises(g.GeometryError):
            g.maximal_rectangle(sinai_domain, (0, 0), (0.0, 0.0))

    def test_strip_interior_obstacle_free_and_maximal(self, sinai_domain):
        # note: radius 0.25 leaves room only in the axis and (1,1) families
        # (spacing 1/sqrt(p^2+q^2) must exceed the disc diameter)
        cor = g.maximal_rectangle(sinai_domain, (1, 1), (0.0, 0.5))
        rng = np.random.default_rng(0)
        ts = rng.uniform(0, cor.period, 10_000)
        ss = rng.uniform(-cor.half_width + 1e-9, cor.half_width - 1e-9, 10_000)
        xs, ys = cor.point(ts, ss)
        assert not sinai_domain._in_closed_obstacle(xs, ys).any()
        # inflating by eps meets the obstacle closure
        eps = 1e-6
        tt = np.linspace(0, cor.period, 200_000, endpoint=False)
        touched = False
        for s in (cor.half_width + eps, -(cor.half_width + eps)):
            xs, ys = cor.point(tt, np.full_like(tt, s))
            d = g._obstacle_boundary_distance_torus(sinai_domain.obstacle, xs, ys)
            inside = sinai_domain._in_closed_obstacle(xs, ys)
            if inside.any() or (d.min() < 1e-5):
                touched = True
        assert touched

    def test_polygon_obstacle_corridor(self):
        poly = g.Polygon(((0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)))
        dom = g.TorusMinusObstacle(poly)
        cor = g.maximal_rectangle(dom, (1, 0), (0.0, 0.0))
        assert cor.half_width == pytest.approx(0.4, abs=1e-12)

    def test_non_coprime_direction_reduced(self, sinai_domain):
        cor = g.maximal_rectangle(sinai_domain, (2, 0), (0.0, 0.0))
        assert cor.direction == (1, 0)
        assert cor.period == pytest.approx(1.0)


class TestObstacleValidation:
    def test_obstacle_must_be_strictly_inside(self):
        with pytest.raises(g.GeometryError):
            g.TorusMinusObstacle(g.Disc((0.5, 0.5), 0.55))

    def test_polygon_must_be_simple(self):
        with pytest.raises(g.GeometryError, match="simple"):
            g.Polygon(((0, 0), (1, 1), (1, 0), (0, 1)))

    def test_disc_radius_positive(self):
        with pytest.raises(g.GeometryError):
            g.Disc((0.5, 0.5), 0.0)

    def test_barrier_slit_validation(self):
        with pytest.raises(g.GeometryError):
            g.Barrier(slit_x=0.5, slit_y0=0.7, slit_y1=0.3)
