"""Dimension-generic vector/segment primitives, rigid motions, Hausdorff
distance and planar winding numbers.

Everything operates on plain numpy arrays: points are length-d vectors,
point sets are (n, d) arrays, segments are (2, d) arrays of endpoints.
All lengths are dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


class StructureError(ValueError):
    """Malformed input data: bad shapes, non-finite coordinates, empty sets."""


@dataclass(frozen=True)
class ToleranceConfig:
    """Central tolerance profile shared across the library.

    pose: coordinate residual for normalized poses and exact identities.
    isometry: relative length residual accepted by band validation.
    root_residual: accepted residual for numeric root finding (T-patterns).
    sampling_eta: default resolution when densifying segments/curves;
        distances measured on such samplings carry error bars of +-2*eta.
    """

    pose: float = 1e-12
    isometry: float = 1e-9
    root_residual: float = 1e-8
    sampling_eta: float = 1e-4
    winding_residual: float = 1e-6

    def replace(self, **kw) -> "ToleranceConfig":
        from dataclasses import replace

        return replace(self, **kw)


DEFAULT_TOL = ToleranceConfig()


def _as_points(a, name="points") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[0] == 0:
        raise StructureError(f"empty set: {name} must be a nonempty (n, d) array")
    if not np.isfinite(a).all():
        raise StructureError(f"{name} contains non-finite coordinates")
    return a


def segment_length(seg) -> float:
    seg = np.asarray(seg, dtype=float)
    return float(np.linalg.norm(seg[1] - seg[0]))


def densify_segment(a, b, eta: float) -> np.ndarray:
    """Points along the segment a-b at spacing <= eta (both ends included)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = max(1, int(np.ceil(np.linalg.norm(b - a) / eta)))
    t = np.linspace(0.0, 1.0, n + 1)
    return a[None, :] + t[:, None] * (b - a)[None, :]


def densify_polyline(points, eta: float, closed: bool = False) -> np.ndarray:
    """Sample a polyline at spacing <= eta; vertices are always included."""
    pts = _as_points(points, "polyline")
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        out.append(densify_segment(a, b, eta)[:-1])
    if closed:
        out.append(densify_segment(pts[-1], pts[0], eta)[:-1])
    else:
        out.append(pts[-1][None, :])
    return np.vstack(out)


def point_segment_distance(p, a, b) -> float:
    """Euclidean distance from point p to the segment a-b."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = np.clip(float((p - a) @ ab) / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def points_segment_distance(pts, a, b) -> np.ndarray:
    """Vectorized distance from each row of pts to the segment a-b."""
    pts = _as_points(pts)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    t = np.clip((pts - a) @ ab / denom, 0.0, 1.0)
    feet = a[None, :] + t[:, None] * ab[None, :]
    return np.linalg.norm(pts - feet, axis=1)


def segment_line_distance(seg, line_point, line_dir) -> float:
    """Distance between a segment and an (infinite) line."""
    seg = np.asarray(seg, dtype=float)
    p = np.asarray(line_point, dtype=float)
    d = np.asarray(line_dir, dtype=float)
    if seg.shape[1] == 2:
        seg = np.pad(seg, ((0, 0), (0, 1)))
        p = np.append(p, 0.0)
        d = np.append(d, 0.0)
    nd = np.linalg.norm(d)
    if nd == 0.0:
        raise StructureError("line direction must be nonzero")
    d = d / nd
    # candidate closest points: the segment endpoints against the line,
    # plus the interior point realizing the common perpendicular
    candidates = []
    for q in seg:
        v = q - p
        candidates.append(np.linalg.norm(v - (v @ d) * d))
    u = seg[1] - seg[0]
    lu = np.linalg.norm(u)
    if lu > 0.0:
        u = u / lu
        if np.linalg.norm(np.cross(u, d)) > 1e-14:
            w0 = p - seg[0]
            b = float(u @ d)
            s = (float(u @ w0) - b * float(d @ w0)) / (1.0 - b * b)
            if 0.0 <= s <= lu:
                v = seg[0] + s * u - p
                candidates.append(np.linalg.norm(v - (v @ d) * d))
    return float(min(candidates))


def line_line_offset(p1, d1, p2, d2) -> float:
    """Signed length of the common perpendicular between two 3D lines.

    The sign is the sign of the triple product det[d1, d2, p2-p1]; it flips
    when either direction is reversed.  Requires the directions to be
    non-parallel.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    n = np.cross(d1, d2)
    nn = np.linalg.norm(n)
    if nn < 1e-14:
        raise StructureError("lines are parallel; offset undefined")
    return float((p2 - p1) @ n / nn)


def closest_line_params(p1, d1, p2, d2) -> tuple[float, float]:
    """Arclength parameters (s1, s2) of the mutually closest points of two
    lines p_i + s_i * d_i (directions unit)."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    w0 = p2 - p1
    b = float(d1 @ d2)
    denom = 1.0 - b * b
    if denom < 1e-18:
        raise StructureError("lines are parallel; closest params undefined")
    s1 = (float(d1 @ w0) - b * float(d2 @ w0)) / denom
    s2 = (b * float(d1 @ w0) - float(d2 @ w0)) / denom
    return s1, s2


# ---------------------------------------------------------------------------
# Rigid motions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RigidMotion:
    """Isometry of R^3: x -> rotation @ x + translation.

    The rotation block must be orthogonal; determinant may be -1 (improper
    isometries are allowed, mirroring what an ambient isometry may do).
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if r.shape != (3, 3) or t.shape != (3,):
            raise StructureError("RigidMotion needs a 3x3 rotation and 3-vector")
        if not (np.isfinite(r).all() and np.isfinite(t).all()):
            raise StructureError("RigidMotion coordinates must be finite")
        if np.abs(r @ r.T - np.eye(3)).max() > 1e-9:
            raise StructureError("rotation block is not orthogonal")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)
        r.setflags(write=False)
        t.setflags(write=False)

    @classmethod
    def identity(cls) -> "RigidMotion":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_rows(cls, ex, ey, ez, origin) -> "RigidMotion":
        """Motion sending `origin` to 0 and the given orthonormal frame to
        the coordinate axes."""
        r = np.vstack([ex, ey, ez]).astype(float)
        t = -r @ np.asarray(origin, dtype=float)
        return cls(r, t)

    @classmethod
    def translation_by(cls, v) -> "RigidMotion":
        return cls(np.eye(3), np.asarray(v, dtype=float))

    @classmethod
    def random(cls, rng: np.random.Generator, scale: float = 1.0) -> "RigidMotion":
        """Haar-ish random proper rotation plus a bounded random translation."""
        a = rng.normal(size=(3, 3))
        q, r = np.linalg.qr(a)
        q = q * np.sign(np.diag(r))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        return cls(q, rng.uniform(-scale, scale, size=3))

    def apply(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidMotion") -> "RigidMotion":
        """self after other: (self*other)(x) = self(other(x))."""
        return RigidMotion(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidMotion":
        rt = self.rotation.T
        return RigidMotion(rt, -rt @ self.translation)


def apply_motion(motion: RigidMotion, pts) -> np.ndarray:
    return motion.apply(pts)


def compose_motion(a: RigidMotion, b: RigidMotion) -> RigidMotion:
    return a.compose(b)


def rotation_about_line(point, direction, angle: float) -> RigidMotion:
    """Rotation by `angle` about the line through `point` with `direction`."""
    p = np.asarray(point, dtype=float)
    k = np.asarray(direction, dtype=float)
    k = k / np.linalg.norm(k)
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    r = np.eye(3) + np.sin(angle) * kx + (1.0 - np.cos(angle)) * (kx @ kx)
    return RigidMotion(r, p - r @ p)


# ---------------------------------------------------------------------------
# Polyline loops and winding numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolylineLoop:
    """Ordered point list, optionally closed.  Closed loops may not contain
    zero-length edges; consecutive duplicates are dropped on construction."""

    points: np.ndarray
    closed: bool = True

    def __post_init__(self):
        pts = _as_points(self.points, "loop")
        if self.closed and len(pts) > 1:
            keep = [0]
            for i in range(1, len(pts)):
                if np.linalg.norm(pts[i] - pts[keep[-1]]) > 1e-14:
                    keep.append(i)
            if np.linalg.norm(pts[keep[-1]] - pts[keep[0]]) <= 1e-14 and len(keep) > 1:
                keep.pop()
            pts = pts[keep]
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    def edge_count(self) -> int:
        n = len(self.points)
        return n if self.closed else n - 1

    def length(self) -> float:
        pts = self.points
        total = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
        if self.closed:
            total += float(np.linalg.norm(pts[0] - pts[-1]))
        return total

    def sample(self, eta: float) -> np.ndarray:
        return densify_polyline(self.points, eta, closed=self.closed)

    def rotate_start(self, k: int) -> "PolylineLoop":
        k = k % len(self.points)
        return PolylineLoop(np.roll(self.points, -k, axis=0), self.closed)


def winding_number(loop, point, tol: ToleranceConfig = DEFAULT_TOL) -> int:
    """Signed winding number of a closed planar loop around a point.

    Computed by summing signed angle increments between consecutive
    vertices; this is robust against near-collinear edges.  Raises if the
    point sits on the loop or if the angle sum is not close to a multiple
    of 2*pi.
    """
    pts = loop.points if isinstance(loop, PolylineLoop) else _as_points(loop, "loop")
    if pts.shape[1] != 2:
        raise StructureError("winding_number expects a planar (n, 2) loop")
    p = np.asarray(point, dtype=float)
    rel = pts - p[None, :]
    # distance from the point to every loop edge
    nxt = np.roll(rel, -1, axis=0)
    for a, b in zip(rel, nxt):
        if point_segment_distance(np.zeros(2), a, b) < 1e-12:
            raise StructureError("point lies on the loop")
    ang = np.arctan2(rel[:, 1], rel[:, 0])
    inc = np.diff(np.concatenate([ang, ang[:1]]))
    inc = (inc + np.pi) % (2.0 * np.pi) - np.pi
    total = float(inc.sum()) / (2.0 * np.pi)
    w = round(total)
    if abs(total - w) > tol.winding_residual:
        raise StructureError(f"ambiguous winding: residual {abs(total - w):.3e}")
    return int(w)


# ---------------------------------------------------------------------------
# Hausdorff distance
# ---------------------------------------------------------------------------


def directed_hausdorff(a, b) -> float:
    """sup over a of the distance to the sample set b."""
    a = _as_points(a, "a")
    b = _as_points(b, "b")
    tree = cKDTree(b)
    d, _ = tree.query(a, k=1)
    return float(np.max(d))


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two finite sampled point sets.

    Callers densify segments/curves to a documented resolution eta before
    calling; the result then carries an error bar of +-2*eta relative to
    the underlying continuous sets.
    """
    a = _as_points(a, "a")
    b = _as_points(b, "b")
    if a.shape[1] != b.shape[1]:
        raise StructureError("point sets must share a dimension")
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))
