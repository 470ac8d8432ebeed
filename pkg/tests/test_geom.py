import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moebiusband.geom import (
    PolylineLoop,
    RigidMotion,
    StructureError,
    densify_polyline,
    densify_segment,
    hausdorff_distance,
    line_line_offset,
    point_segment_distance,
    rotation_about_line,
    segment_line_distance,
    winding_number,
)

SQRT3 = math.sqrt(3.0)
TRIANGLE = np.array([[-1 / SQRT3, 0.0, 0.0], [1 / SQRT3, 0.0, 0.0], [0.0, -1.0, 0.0]])


def triangle_curve_samples(vertices, eta):
    return densify_polyline(vertices, eta, closed=True)


def brute_force_hausdorff(a, b, chunk=512):
    """Independent O(n*m) oracle for the sampled Hausdorff distance."""
    def directed(p, q):
        worst = 0.0
        for lo in range(0, len(p), chunk):
            d2 = ((p[lo:lo + chunk, None, :] - q[None, :, :]) ** 2).sum(-1)
            worst = max(worst, float(np.sqrt(d2.min(axis=1)).max()))
        return worst

    return max(directed(a, b), directed(b, a))


class TestHausdorff:
    def test_identical_singletons(self):
        p = np.array([[0.0, 0.0, 0.0]])
        assert hausdorff_distance(p, p) == 0.0

    def test_single_pair_euclidean(self):
        a = np.array([[0.0, 0.0, 0.0]])
        b = np.array([[3.0, 4.0, 0.0]])
        assert hausdorff_distance(a, b) == pytest.approx(5.0, abs=1e-15)

    def test_translated_triangle_matches_brute_force(self):
        # oracle first: dense sampling at a coarse eta, brute force O(n^2)
        eta = 1e-3
        a = triangle_curve_samples(TRIANGLE, eta)
        b = a + np.array([0.1, 0.0, 0.0])
        oracle = brute_force_hausdorff(a, b)
        assert abs(oracle - 0.1) <= 2 * eta
        assert hausdorff_distance(a, b) == pytest.approx(oracle, abs=1e-12)

    def test_translated_triangle_fine_eta(self):
        eta = 1e-4
        a = triangle_curve_samples(TRIANGLE, eta)
        b = a + np.array([0.1, 0.0, 0.0])
        assert abs(hausdorff_distance(a, b) - 0.1) <= 2 * eta

    def test_symmetry_and_triangle_inequality(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            a = rng.normal(size=(40, 3))
            b = rng.normal(size=(25, 3))
            c = rng.normal(size=(33, 3))
            dab = hausdorff_distance(a, b)
            assert dab == pytest.approx(hausdorff_distance(b, a), abs=1e-12)
            assert dab <= hausdorff_distance(a, c) + hausdorff_distance(c, b) + 1e-12

    def test_empty_set_rejected(self):
        with pytest.raises(StructureError, match="empty set"):
            hausdorff_distance(np.zeros((0, 3)), np.zeros((1, 3)))


class TestWinding:
    SQUARE = np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])

    def test_ccw_square_origin(self):
        assert winding_number(self.SQUARE, [0.0, 0.0]) == 1

    def test_point_outside(self):
        assert winding_number(self.SQUARE, [5.0, 5.0]) == 0

    def test_cw_square_origin(self):
        assert winding_number(self.SQUARE[::-1], [0.0, 0.0]) == -1

    @given(st.integers(min_value=0, max_value=7))
    @settings(max_examples=8, deadline=None)
    def test_invariant_under_start_rotation(self, k):
        loop = PolylineLoop(self.SQUARE).rotate_start(k)
        assert winding_number(loop, [0.2, -0.3]) == 1

    def test_point_on_loop_rejected(self):
        with pytest.raises(StructureError, match="on the loop"):
            winding_number(self.SQUARE, [1.0, 0.0])

    def test_near_collinear_edges(self):
        # many collinear vertices along each side must not confuse the count
        side = np.linspace(0.0, 1.0, 50)
        bot = np.stack([side, np.zeros_like(side)], axis=1)
        top = np.stack([side[::-1], np.ones_like(side)], axis=1)
        assert winding_number(np.vstack([bot, top]), [0.5, 0.5]) == 1


class TestRigidMotion:
    def test_identity(self):
        m = RigidMotion.identity()
        p = np.array([1.0, 2.0, 3.0])
        assert np.allclose(m.apply(p), p, atol=0.0)

    def test_distance_invariance_random(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            m = RigidMotion.random(rng, scale=2.0)
            p = rng.normal(size=(10, 3))
            q = rng.normal(size=(10, 3))
            d0 = np.linalg.norm(p - q, axis=1)
            d1 = np.linalg.norm(m.apply(p) - m.apply(q), axis=1)
            assert np.abs(d0 - d1).max() < 1e-12

    def test_compose_and_inverse(self):
        rng = np.random.default_rng(3)
        a = RigidMotion.random(rng)
        b = RigidMotion.random(rng)
        p = rng.normal(size=(5, 3))
        assert np.allclose(a.compose(b).apply(p), a.apply(b.apply(p)), atol=1e-12)
        assert np.allclose(a.compose(a.inverse()).apply(p), p, atol=1e-12)

    def test_improper_isometry_allowed(self):
        m = RigidMotion(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
        assert np.allclose(m.apply([0.0, 0.0, 2.0]), [0.0, 0.0, -2.0])

    def test_non_orthogonal_rejected(self):
        with pytest.raises(StructureError, match="orthogonal"):
            RigidMotion(np.eye(3) * 1.1, np.zeros(3))

    def test_rotation_about_line(self):
        rot = rotation_about_line([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], math.pi / 2)
        assert np.allclose(rot.apply([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-15)
        # points on the axis stay fixed
        assert np.allclose(rot.apply([0.0, 0.0, 5.0]), [0.0, 0.0, 5.0], atol=1e-15)


class TestSegments:
    def test_point_segment_distance(self):
        assert point_segment_distance([0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]) == 1.0
        assert point_segment_distance([2.0, 0.0], [-1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_segment_line_distance(self):
        seg = np.array([[0.0, 1.0, 0.0], [1.0, 1.0, 0.0]])
        assert segment_line_distance(seg, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]) == pytest.approx(1.0)

    def test_line_line_offset_signs(self):
        p1, d1 = np.zeros(3), np.array([1.0, 0.0, 0.0])
        p2, d2 = np.array([0.0, 0.0, 0.5]), np.array([0.0, 1.0, 0.0])
        off = line_line_offset(p1, d1, p2, d2)
        assert abs(abs(off) - 0.5) < 1e-15
        assert line_line_offset(p1, -d1, p2, d2) == pytest.approx(-off)
        assert line_line_offset(p1, d1, p2, -d2) == pytest.approx(-off)

    def test_densify_spacing(self):
        pts = densify_segment([0.0, 0.0], [1.0, 0.0], 0.3)
        gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        assert gaps.max() <= 0.3 + 1e-12
        assert np.allclose(pts[0], [0, 0]) and np.allclose(pts[-1], [1, 0])


class TestPolylineLoop:
    def test_dedupe_and_length(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
        loop = PolylineLoop(pts, closed=True)
        assert len(loop) == 3
        assert loop.length() == pytest.approx(2.0 + math.sqrt(2.0))

    def test_sample_resolution(self):
        loop = PolylineLoop(np.array([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0]]), closed=True)
        s = loop.sample(0.05)
        gaps = np.linalg.norm(np.diff(np.vstack([s, s[:1]]), axis=0), axis=1)
        assert gaps.max() <= 0.05 + 1e-12
