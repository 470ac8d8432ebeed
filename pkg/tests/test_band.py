import json
import math

import numpy as np
import pytest

from moebiusband.band import (
    CANONICAL_TRIANGLE,
    RuledBand,
    build_triangular,
    build_wrinkle,
    boundary_polyline,
    core_curve,
    from_json_dict,
    points_to_triangles_distance,
    redevelop,
    sample_surface,
    scale_bend,
    surface_triangles,
    to_json_dict,
    flip,
    validate,
)
from moebiusband.geom import DEFAULT_TOL, StructureError, densify_polyline, hausdorff_distance

SQRT3 = math.sqrt(3.0)


class TestTriangular:
    def test_validation_exact(self, tri_band):
        rep = validate(tri_band)
        assert rep.passed
        assert rep.max_ruling_residual < 1e-10
        assert rep.max_boundary_residual < 1e-10
        assert rep.foliation_violations == 0

    def test_aspect_and_cut(self, tri_band):
        assert tri_band.lam == pytest.approx(SQRT3, abs=1e-15)
        assert tri_band.cut_displacement() == pytest.approx(1.0 / SQRT3, abs=1e-15)

    def test_boundary_is_canonical_triangle(self, tri_band):
        loop = boundary_polyline(tri_band)
        # perimeter equals the full boundary length 2*lambda
        assert loop.length() == pytest.approx(2.0 * SQRT3, abs=1e-9)
        eta = 1e-4
        bdry = loop.sample(eta)
        tri = densify_polyline(CANONICAL_TRIANGLE, eta, closed=True)
        assert hausdorff_distance(bdry, tri) <= 2.0 * eta

    def test_cut_bend_is_base(self, tri_band):
        sp = tri_band.space[0]
        assert np.allclose(sp[0], [1.0 / SQRT3, 0.0, 0.0], atol=1e-15)
        assert np.allclose(sp[1], [-1.0 / SQRT3, 0.0, 0.0], atol=1e-15)

    def test_all_bends_cross_width(self, tri_band):
        assert tri_band.flat_lengths().min() >= 1.0 - 1e-12

    def test_surface_inside_triangle(self, tri_band):
        pts = sample_surface(tri_band, 1e-2)
        d = points_to_triangles_distance(pts, CANONICAL_TRIANGLE[None])
        assert d.max() < 1e-12

    def test_odd_fan_count_rejected(self):
        with pytest.raises(StructureError):
            build_triangular(n_per_fan=7)


class TestCoreCurve:
    def test_point_count_and_closure(self, tri_band):
        loop = core_curve(tri_band)
        assert len(loop) == tri_band.n_bends
        assert loop.closed

    def test_inside_convex_hull(self, tri_band):
        mids = core_curve(tri_band).points
        d = points_to_triangles_distance(mids, CANONICAL_TRIANGLE[None])
        assert d.max() < 1e-12

    def test_orientation_reversal_same_set(self, tri_band):
        fwd = core_curve(tri_band).points
        rev_band = RuledBand(
            lam=tri_band.lam,
            flat=tri_band.flat[:, ::-1, ::-1] * 0 + tri_band.flat,  # same flat data
            space=tri_band.space[:, ::-1, :],
            closed=True,
        )
        rev = core_curve(rev_band).points
        assert np.allclose(np.sort(fwd, axis=0), np.sort(rev, axis=0), atol=1e-15)


class TestSampling:
    def test_sample_counts(self, tri_band):
        eta = 0.05
        pts = sample_surface(tri_band, eta)
        min_count = int(np.ceil(tri_band.space_lengths() / eta).sum()) + tri_band.n_bends
        assert len(pts) >= min_count

    def test_wrinkle_max_height_matches_crack(self, wrinkle4):
        eta = 1e-3
        pts = sample_surface(wrinkle4, eta)
        zmax = np.abs(pts[:, 2]).max()
        assert zmax == pytest.approx(wrinkle4.meta["crack_height"], abs=eta)

    def test_surface_triangles_shape(self, tri_band):
        tris = surface_triangles(tri_band)
        assert tris.shape == (2 * tri_band.n_bends, 3, 3)


class TestValidationNegative:
    def test_scaled_bend_fails(self, tri_band):
        bad = scale_bend(tri_band, 10, 1.01)
        rep = validate(bad)
        assert not rep.passed
        assert rep.max_ruling_residual == pytest.approx(0.01, rel=0.3)

    def test_too_few_bends(self, tri_band):
        with pytest.raises(StructureError, match="at least 8"):
            validate(RuledBand(tri_band.lam, tri_band.flat[:4], tri_band.space[:4]))

    def test_nonfinite_rejected(self, tri_band):
        flat = tri_band.flat.copy()
        flat[3, 0, 0] = np.nan
        with pytest.raises(StructureError):
            RuledBand(tri_band.lam, flat, tri_band.space)

    def test_interior_endpoint_rejected(self, tri_band):
        flat = tri_band.flat.copy()
        flat[5, 0, 1] = 0.2
        with pytest.raises(StructureError, match="boundary"):
            validate(RuledBand(tri_band.lam, flat, tri_band.space))


class TestWrinkleFamily:
    def test_closure_residual(self, wrinkle4):
        assert wrinkle4.meta["closure_residual"] < 1e-10

    def test_validation(self, wrinkle4):
        rep = validate(wrinkle4)
        assert rep.passed
        assert rep.max_ruling_residual < 1e-10

    def test_aspect_excess_linear_in_eps(self):
        for eps in (1e-4, 1e-3):
            band = build_wrinkle(eps)
            excess = band.lam - SQRT3
            assert 0.0 < excess <= 0.5 * eps

    def test_lambda_monotone_in_eps(self):
        grid = [1e-5, 1e-4, 1e-3, 3e-3, 1e-2]
        lams = [build_wrinkle(e).lam for e in grid]
        assert all(a < b for a, b in zip(lams, lams[1:]))

    def test_contains_canonical_triangle(self, wrinkle4):
        # the two untouched fans each cover the full triangle
        tris = surface_triangles(wrinkle4)
        corners = np.vstack([CANONICAL_TRIANGLE, [[0.0, -0.4, 0.0]], [[0.1, -0.2, 0.0]]])
        d = points_to_triangles_distance(corners, tris)
        assert d.max() < 1e-12

    def test_height_scales_like_sqrt_eps(self):
        eps = np.array([1e-3, 1e-4, 1e-5])
        heights = []
        for e in eps:
            band = build_wrinkle(float(e))
            heights.append(np.abs(band.space[:, :, 2]).max())
        slope = np.polyfit(np.log(eps), np.log(heights), 1)[0]
        assert slope == pytest.approx(0.5, abs=0.1)

    def test_hausdorff_to_triangle_vanishes(self):
        dists = []
        for e in (1e-3, 1e-4, 1e-5):
            band = build_wrinkle(e)
            pts = sample_surface(band, 1e-3)
            dists.append(points_to_triangles_distance(pts, CANONICAL_TRIANGLE[None]).max())
        assert dists[0] > dists[1] > dists[2]
        assert dists[2] < 2e-3

    def test_epsilon_range(self):
        with pytest.raises(StructureError):
            build_wrinkle(0.0)
        with pytest.raises(StructureError):
            build_wrinkle(0.5)

    def test_frozen_solved_constants(self, wrinkle4):
        # regression values of the closure solve at eps = 1e-4
        meta = wrinkle4.meta
        assert meta["theta"] == pytest.approx(1e-2, abs=0.0)
        assert meta["width"] == pytest.approx(4.3300909356e-05, rel=1e-9)
        assert meta["crease_offset"] == pytest.approx(1.0825221482e-05, rel=1e-9)
        assert meta["crack_height"] == pytest.approx(4.9999166671e-03, rel=1e-9)
        assert meta["excess_coeff"] == pytest.approx(math.sqrt(3.0) / 4.0, rel=1e-4)

    def test_surface_within_containment_budget(self, wrinkle4):
        eps_excess = wrinkle4.lam - SQRT3
        pts = sample_surface(wrinkle4, 1e-3)
        d = points_to_triangles_distance(pts, CANONICAL_TRIANGLE[None])
        assert d.max() <= 6.0 * math.sqrt(eps_excess)


class TestDevelopment:
    def test_redevelop_at_integer_keeps_validity(self, tri_band):
        for k in (1, 40, 100):
            dev = redevelop(tri_band, k)
            rep = validate(dev, DEFAULT_TOL)
            assert rep.passed
            assert np.allclose(dev.flat[0, 0], [0.0, 0.0], atol=1e-12)

    def test_redevelop_identity(self, tri_band):
        dev = redevelop(tri_band, 0)
        assert np.allclose(dev.flat, tri_band.flat, atol=1e-12)
        assert np.allclose(dev.space, tri_band.space, atol=0.0)

    def test_flip_negates_displacement(self, tri_band):
        flipped = flip(tri_band)
        assert flipped.cut_displacement() == pytest.approx(
            -tri_band.cut_displacement(), abs=1e-15
        )
        assert validate(flipped).passed


class TestSerialization:
    def test_round_trip_exact(self, wrinkle4, tmp_path):
        data = to_json_dict(wrinkle4)
        back = from_json_dict(json.loads(json.dumps(data)))
        assert back.lam == wrinkle4.lam
        assert np.array_equal(back.flat, wrinkle4.flat)
        assert np.array_equal(back.space, wrinkle4.space)

    def test_bend_order_starts_at_min_midpoint(self, tri_band):
        data = to_json_dict(tri_band)
        mids = [0.5 * (b["flat"][0][0] + b["flat"][1][0]) for b in data["bends"]]
        assert int(np.argmin(mids)) == 0

    def test_malformed_rejected(self):
        with pytest.raises(StructureError, match="malformed"):
            from_json_dict({"format_version": 1, "bends": []})
        with pytest.raises(StructureError, match="format_version"):
            from_json_dict({"format_version": 99, "lambda": 2.0, "bends": []})
