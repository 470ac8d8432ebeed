import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moebiusband.flatmodel import FlatBand, boundary_edges, boundary_length, make_trapezoid
from moebiusband.geom import StructureError

SQRT3 = math.sqrt(3.0)


class TestMakeTrapezoid:
    def test_optimal_cut_lengths(self):
        trap = make_trapezoid(SQRT3, 1.0 / SQRT3)
        assert trap.len_h() == pytest.approx(2.0 / SQRT3, abs=1e-12)
        assert trap.len_d() == pytest.approx(4.0 / SQRT3, abs=1e-12)
        # the cut length coincides with the short side at the optimum
        assert trap.len_t() == pytest.approx(2.0 / SQRT3, abs=1e-12)

    def test_zero_displacement_rectangle(self):
        trap = make_trapezoid(2.0, 0.0)
        assert trap.len_h() == 2.0
        assert trap.len_d() == 2.0
        assert trap.len_t() == 1.0

    def test_displacement_identity(self):
        trap = make_trapezoid(SQRT3 + 0.01, 0.5)
        assert trap.len_d() - trap.len_h() == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_rejected(self):
        with pytest.raises(StructureError, match="degenerate trapezoid"):
            make_trapezoid(1.0, 1.0)
        with pytest.raises(StructureError, match="degenerate trapezoid"):
            make_trapezoid(1.0, -1.5)

    def test_measured_edges_match_closed_forms(self):
        trap = make_trapezoid(1.9, 0.3)
        e = {edge.name: edge.length() for edge in trap.edges()}
        assert e["D1"] + e["D2"] == pytest.approx(trap.len_d(), abs=1e-12)
        assert e["H1"] + e["H2"] == pytest.approx(trap.len_h(), abs=1e-12)
        assert e["T1"] == pytest.approx(math.hypot(1.0, 0.3), abs=1e-12)
        assert e["T2"] == pytest.approx(e["T1"], abs=1e-12)

    @given(
        lam=st.floats(min_value=0.2, max_value=5.0),
        frac=st.floats(min_value=-0.95, max_value=0.95),
    )
    @settings(max_examples=200, deadline=None)
    def test_length_sum_exact(self, lam, frac):
        trap = make_trapezoid(lam, frac * lam)
        assert trap.len_h() + trap.len_d() == pytest.approx(2.0 * lam, abs=1e-12)
        trap.check_invariants(atol=1e-9)


class TestBoundaryEdges:
    def test_six_edges(self):
        trap = make_trapezoid(SQRT3, 1.0 / SQRT3)
        edges = boundary_edges(trap)
        assert len(edges) == 6
        assert [e.name for e in edges] == ["D1", "D2", "T2", "H1", "H2", "T1"]

    def test_boundary_length_excludes_cut(self):
        trap = make_trapezoid(SQRT3, 1.0 / SQRT3)
        assert boundary_length(trap) == pytest.approx(2.0 * SQRT3, abs=1e-12)
        trap = make_trapezoid(2.0, 0.0)
        assert boundary_length(trap) == pytest.approx(4.0, abs=1e-12)

    def test_chain_continuity(self):
        # the boundary walk is connected through the glued corners
        trap = make_trapezoid(1.8, 0.4)
        edges = {e.name: e for e in boundary_edges(trap)}
        assert np.allclose(edges["D1"].end, edges["D2"].start)
        assert np.allclose(edges["H1"].end, edges["H2"].start)
        # D ends at the glued copy of the cut's top corner, H resumes there
        assert np.allclose(edges["D2"].end, trap.x_bar)
        assert np.allclose(edges["H1"].start, trap.x)


class TestFlatBand:
    def test_identification_round_trip(self):
        band = FlatBand(2.0)
        x, y = band.identify(2.3, 0.25)
        assert (x, y) == pytest.approx((0.3, 0.75))
        x, y = band.identify(-0.5, 0.1)
        assert (x, y) == pytest.approx((1.5, 0.9))

    def test_boundary_length(self):
        assert FlatBand(1.7).boundary_length() == pytest.approx(3.4)

    def test_bad_aspect(self):
        with pytest.raises(StructureError):
            FlatBand(0.0)
