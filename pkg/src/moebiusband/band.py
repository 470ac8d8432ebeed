"""Discrete embedded bands represented as bend foliations.

A band is stored as an ordered list of bends.  Each bend is a straight
segment with its endpoints (and only its endpoints) on the boundary of the
flat band, paired with its straight image segment in R^3.  Flat coordinates
are the development of the band cut open along bends[0] (see flatmodel for
the conventions); the glide map g(x, y) = (x + lambda, 1 - y) re-attaches
the far end of the development to the first bend, which encodes the
half-twist: traversing the full list returns to bend 0 with its endpoints
exchanged.

The two generators here are exact piecewise-rigid constructions: the
flat-folded triangular band (aspect ratio sqrt(3), image equal to the
canonical triangle), and the wrinkle family, a polygonal modification of
the triangular band with aspect ratio sqrt(3) + O(eps) whose image rises
O(sqrt(eps)) out of the plane.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geom import (
    DEFAULT_TOL,
    PolylineLoop,
    RigidMotion,
    StructureError,
    ToleranceConfig,
    rotation_about_line,
)
from .flatmodel import SQRT3, T_OPT

FORMAT_VERSION = 1

SIDE = 2.0 / SQRT3  # side length of the canonical triangle (perimeter 2*sqrt(3))
APEX = np.array([0.0, -1.0, 0.0])
BASE_L = np.array([-T_OPT, 0.0, 0.0])
BASE_R = np.array([T_OPT, 0.0, 0.0])
CANONICAL_TRIANGLE = np.array([BASE_L, BASE_R, APEX])
INCENTER = np.array([0.0, -1.0 / 3.0, 0.0])
INRADIUS = 1.0 / 3.0

# reflections (about lines through the origin) used by the flat folding:
# _REFL_L fixes the line through (-1/sqrt(3), 1), _REFL_R its mirror image.
_REFL_L = np.array([[-0.5, -0.5 * SQRT3], [-0.5 * SQRT3, 0.5]])
_REFL_R = np.array([[-0.5, 0.5 * SQRT3], [0.5 * SQRT3, 0.5]])


class WrinkleClosureError(RuntimeError):
    """The plug width solve did not reach its residual target."""


@dataclass(frozen=True)
class RuledBand:
    """Ordered bend foliation of an embedded band.

    flat: (N, 2, 2) development coordinates, rows [bottom, top] per bend,
        bottom on y = 0, top on y = 1, and flat[0, 0] at the origin.
    space: (N, 2, 3) image segments, same row convention.
    lam: aspect ratio of the underlying flat band.
    """

    lam: float
    flat: np.ndarray
    space: np.ndarray
    closed: bool = True
    meta: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        flat = np.asarray(self.flat, dtype=float)
        space = np.asarray(self.space, dtype=float)
        if flat.ndim != 3 or flat.shape[1:] != (2, 2):
            raise StructureError("flat must have shape (N, 2, 2)")
        if space.shape != (flat.shape[0], 2, 3):
            raise StructureError("space must have shape (N, 2, 3)")
        if not (np.isfinite(flat).all() and np.isfinite(space).all()):
            raise StructureError("band coordinates must be finite")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise StructureError("aspect ratio must be positive")
        object.__setattr__(self, "flat", flat)
        object.__setattr__(self, "space", space)
        flat.setflags(write=False)
        space.setflags(write=False)

    def __len__(self) -> int:
        return self.flat.shape[0]

    @property
    def n_bends(self) -> int:
        return self.flat.shape[0]

    def flat_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.flat[:, 1] - self.flat[:, 0], axis=1)

    def space_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.space[:, 1] - self.space[:, 0], axis=1)

    def cut_displacement(self) -> float:
        """Horizontal displacement of the cut bend (bends[0])."""
        return float(self.flat[0, 1, 0] - self.flat[0, 0, 0])

    def glued_first_bend(self) -> tuple[np.ndarray, np.ndarray]:
        """The re-attached copy of bends[0] at the far end of the
        development: rows stay [bottom, top], so the endpoint order is
        exchanged relative to bends[0] (the Moebius half-twist)."""
        g_flat = np.empty((2, 2))
        g_flat[0] = [self.flat[0, 1, 0] + self.lam, 0.0]
        g_flat[1] = [self.flat[0, 0, 0] + self.lam, 1.0]
        g_space = self.space[0, ::-1].copy()
        return g_flat, g_space


@dataclass(frozen=True)
class ValidationReport:
    max_ruling_residual: float
    max_boundary_residual: float
    foliation_violations: int
    passed: bool
    details: dict = field(default_factory=dict, compare=False)


def validate(band: RuledBand, tol: ToleranceConfig = DEFAULT_TOL) -> ValidationReport:
    """Check the discrete necessary conditions for an isometric embedding.

    Verified: bend endpoints on the boundary lines, ruling isometry
    (|space length - flat length| <= tol relative), boundary arc-length
    isometry edge by edge including the glued wrap, foliation ordering
    (no consecutive crossings or duplicate bends) and the width-1 chord
    bound flat length >= 1.
    """
    n = band.n_bends
    if n < 8:
        raise StructureError(f"need at least 8 bends, got {n}")
    flat, space = band.flat, band.space
    if np.max(np.abs(flat[:, 0, 1])) > 1e-9 or np.max(np.abs(flat[:, 1, 1] - 1.0)) > 1e-9:
        raise StructureError("bend endpoints must lie on the boundary lines y=0, y=1")
    if abs(flat[0, 0, 0]) > 1e-9 or abs(flat[0, 0, 1]) > 1e-9:
        raise StructureError("development must start with bends[0] at the origin")

    flat_len = band.flat_lengths()
    space_len = band.space_lengths()
    ruling = np.abs(space_len - flat_len) / np.maximum(1.0, flat_len)
    max_ruling = float(ruling.max())

    g_flat, g_space = band.glued_first_bend()
    bot_x = np.append(flat[:, 0, 0], g_flat[0, 0])
    top_x = np.append(flat[:, 1, 0], g_flat[1, 0])
    bot_sp = np.vstack([space[:, 0], g_space[0][None, :]])
    top_sp = np.vstack([space[:, 1], g_space[1][None, :]])

    d_bot = np.diff(bot_x)
    d_top = np.diff(top_x)
    res_bot = np.abs(np.linalg.norm(np.diff(bot_sp, axis=0), axis=1) - d_bot)
    res_top = np.abs(np.linalg.norm(np.diff(top_sp, axis=0), axis=1) - d_top)
    max_boundary = float(max(res_bot.max(), res_top.max()))

    violations = 0
    crossing = (d_bot < -1e-12) | (d_top < -1e-12)
    violations += int(np.count_nonzero(crossing))
    duplicate = (np.abs(d_bot) < 1e-14) & (np.abs(d_top) < 1e-14)
    violations += int(np.count_nonzero(duplicate))
    short = flat_len < 1.0 - 1e-9
    violations += int(np.count_nonzero(short))

    passed = (
        max_ruling <= tol.isometry
        and max_boundary <= tol.isometry
        and violations == 0
    )
    return ValidationReport(
        max_ruling_residual=max_ruling,
        max_boundary_residual=max_boundary,
        foliation_violations=violations,
        passed=passed,
        details={
            "n_bends": n,
            "min_flat_length": float(flat_len.min()),
            "crossings": int(np.count_nonzero(crossing)),
            "duplicates": int(np.count_nonzero(duplicate)),
            "short_bends": int(np.count_nonzero(short)),
        },
    )


# ---------------------------------------------------------------------------
# Flat-folded triangular band
# ---------------------------------------------------------------------------


def _fold_left(pts: np.ndarray, half_width: float) -> np.ndarray:
    """Image of left-flap points (centered coordinates) in the plane z=0."""
    q = pts + np.array([half_width, 0.0])
    r = q @ _REFL_L.T
    out = np.zeros(pts.shape[:-1] + (3,))
    out[..., 0] = r[..., 0]
    out[..., 1] = r[..., 1] - 1.0
    return out


def _fold_right(pts: np.ndarray, half_width: float) -> np.ndarray:
    q = pts - np.array([half_width, 0.0])
    r = q @ _REFL_R.T
    out = np.zeros(pts.shape[:-1] + (3,))
    out[..., 0] = r[..., 0]
    out[..., 1] = r[..., 1] - 1.0
    return out


def _assemble(lam: float, pieces: list[tuple[np.ndarray, np.ndarray]], shift: float,
              meta: dict | None = None) -> RuledBand:
    """Stack per-piece (flat, space) bend arrays and move to development
    coordinates (bends[0] bottom endpoint at the origin)."""
    flat = np.concatenate([p[0] for p in pieces], axis=0)
    space = np.concatenate([p[1] for p in pieces], axis=0)
    flat = flat.copy()
    flat[:, :, 0] += shift
    flat[:, :, 0] -= flat[0, 0, 0]
    flat[0, 0, 0] = 0.0
    return RuledBand(lam=lam, flat=flat, space=space, meta=meta)


def _fan(bottoms: np.ndarray, tops: np.ndarray,
         space_bottoms: np.ndarray, space_tops: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = len(bottoms)
    flat = np.zeros((k, 2, 2))
    flat[:, 0, 0] = bottoms
    flat[:, 1, 0] = tops
    flat[:, 1, 1] = 1.0
    space = np.stack([space_bottoms, space_tops], axis=1)
    return flat, space


def build_triangular(n_per_fan: int = 48) -> RuledBand:
    """The flat-folded band of aspect ratio sqrt(3).

    Its image is the canonical equilateral triangle with vertices
    (+-1/sqrt(3), 0, 0) and (0, -1, 0) (perimeter 2*sqrt(3), height 1),
    covered by three fans of bends.  The cut bend (bends[0]) maps onto the
    triangle base in the X-axis and the central bend of the middle fan maps
    onto the segment from the origin to (0, -1, 0).
    """
    if n_per_fan < 4 or n_per_fan % 2:
        raise StructureError("n_per_fan must be an even integer >= 4")
    n = n_per_fan
    half = 0.0

    # left fan: bends from the bottom edge to the fixed top vertex
    s = np.linspace(-SIDE, 0.0, n + 1)
    fan_l = _fan(
        s,
        np.full(n + 1, -T_OPT),
        _fold_left(np.stack([s, np.zeros(n + 1)], axis=1), half),
        np.tile(BASE_L, (n + 1, 1)),
    )
    # middle fan: bends from the bottom vertex to the top edge
    sig = np.linspace(-T_OPT, T_OPT, n + 1)[1:]
    mid_tops = np.zeros((n, 3))
    mid_tops[:, 0] = sig
    fan_m = _fan(np.zeros(n), sig, np.tile(APEX, (n, 1)), mid_tops)
    # right fan, excluding the final bend (it is the glued copy of bends[0])
    s = np.linspace(0.0, SIDE, n + 1)[1:-1]
    fan_r = _fan(
        s,
        np.full(n - 1, T_OPT),
        _fold_right(np.stack([s, np.zeros(n - 1)], axis=1), half),
        np.tile(BASE_R, (n - 1, 1)),
    )
    return _assemble(SQRT3, [fan_l, fan_m, fan_r], shift=SIDE,
                     meta={"kind": "triangular", "n_per_fan": n})


# ---------------------------------------------------------------------------
# Wrinkle family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WrinkleConfig:
    theta_scale: float = 1.0   # door angle theta = theta_scale * sqrt(eps)
    n_fan: int = 40
    n_door: int = 12
    n_plug_side: int = 6
    n_plug_mid: int = 12
    closure_tol: float = 1e-10
    max_iter: int = 200


def _angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Angle between two vectors via atan2; well conditioned near zero."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape == (2,):
        cross = abs(u[0] * v[1] - u[1] * v[0])
    else:
        cross = float(np.linalg.norm(np.cross(u, v)))
    return math.atan2(cross, float(u @ v))


def _crack(theta: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Images of the two slit-edge tips after the door rotations, and the
    opening angle of the crack V at the apex."""
    rot_l = rotation_about_line(BASE_L, APEX - BASE_L, theta)
    rot_r = rotation_about_line(BASE_R, APEX - BASE_R, -theta)
    o_l = rot_l.apply(np.zeros(3))
    o_r = rot_r.apply(np.zeros(3))
    return o_l, o_r, _angle_between(o_l - APEX, o_r - APEX)


def _reflect_across(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Reflect 2D points across the line through a and b."""
    d = b - a
    d = d / np.linalg.norm(d)
    rel = pts - a
    proj = rel @ d
    return a + 2.0 * proj[..., None] * d - rel


def _plug_crease_offset(width: float) -> float:
    """Crease foot +-c for which the folded strip's bottom corners meet:
    the positive root of w*c^2 + 4*c - w = 0."""
    return (math.sqrt(4.0 + width * width) - 2.0) / width


def _plug_v_angle(width: float) -> float:
    """Opening angle of the V formed by the vertical edges of a width-`width`
    unit-height strip folded along the two creases from the top midpoint."""
    c = _plug_crease_offset(width)
    t0 = np.array([0.0, 1.0])
    k1 = np.array([-c, 0.0])
    k2 = np.array([c, 0.0])
    vtx = _reflect_across(np.array([-width / 2, 0.0]), t0, k1)
    e_l = _reflect_across(np.array([-width / 2, 1.0]), t0, k1) - vtx
    e_r = _reflect_across(np.array([width / 2, 1.0]), t0, k2) - vtx
    return _angle_between(e_l, e_r)


def _solve_plug_width(gamma: float, tol: float, max_iter: int) -> tuple[float, float]:
    """Bisect for the strip width whose folded V matches the crack angle."""
    lo, hi = 0.25 * gamma, 8.0 * gamma
    f_lo = _plug_v_angle(lo) - gamma
    f_hi = _plug_v_angle(hi) - gamma
    if f_lo > 0.0 or f_hi < 0.0:
        raise WrinkleClosureError("wrinkle closure failed: no bracket for plug width")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = _plug_v_angle(mid) - gamma
        if f_mid <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-18 + 1e-16 * hi:
            break
    width = 0.5 * (lo + hi)
    residual = abs(_plug_v_angle(width) - gamma)
    if residual > tol:
        raise WrinkleClosureError(f"wrinkle closure failed: residual {residual:.3e}")
    return width, residual


class _PlugMap:
    """Piecewise-rigid map of the inserted strip onto the planar plug.

    The strip [-w/2, w/2] x [0, 1] is folded along the creases joining the
    top midpoint to (+-c, 0); the folded picture is then carried by a plane
    isometry onto the plane through the apex and the two crack tips so that
    the strip's vertical edges land on the crack edges.
    """

    def __init__(self, width: float, o_l: np.ndarray, o_r: np.ndarray):
        self.width = width
        self.c = _plug_crease_offset(width)
        self.t0 = np.array([0.0, 1.0])
        self.k1 = np.array([-self.c, 0.0])
        self.k2 = np.array([self.c, 0.0])
        self.vertex = _reflect_across(np.array([-width / 2, 0.0]), self.t0, self.k1)
        f1 = _reflect_across(np.array([-width / 2, 1.0]), self.t0, self.k1) - self.vertex
        f2 = _reflect_across(np.array([width / 2, 1.0]), self.t0, self.k2) - self.vertex
        g1 = o_l - APEX
        g2 = o_r - APEX
        bis = 0.5 * (o_l + o_r) - APEX
        self.e_x = np.array([1.0, 0.0, 0.0])
        self.b_hat = bis / np.linalg.norm(bis)
        g_coords = np.array(
            [[g1 @ self.e_x, g2 @ self.e_x], [g1 @ self.b_hat, g2 @ self.b_hat]]
        )
        t2 = g_coords @ np.linalg.inv(np.column_stack([f1, f2]))
        if np.abs(t2 @ t2.T - np.eye(2)).max() > 1e-7:
            raise WrinkleClosureError("plug placement is not an isometry")
        # project onto the nearest exact plane isometry
        u, _, vt = np.linalg.svd(t2)
        self.t2 = u @ vt

    def fold(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        out = pts.copy()
        y = pts[:, 1]
        left = pts[:, 0] < -self.c * (1.0 - y) - 1e-15
        right = pts[:, 0] > self.c * (1.0 - y) + 1e-15
        if left.any():
            out[left] = _reflect_across(pts[left], self.t0, self.k1)
        if right.any():
            out[right] = _reflect_across(pts[right], self.t0, self.k2)
        return out

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        q = self.fold(np.atleast_2d(pts)) - self.vertex
        plane = q @ self.t2.T
        return APEX + plane[:, :1] * self.e_x + plane[:, 1:] * self.b_hat


def build_wrinkle(epsilon: float, config: WrinkleConfig | None = None) -> RuledBand:
    """Polygonal band of aspect ratio sqrt(3) + O(eps) with a wrinkle.

    The triangle covered by the middle fan of the triangular band is slit
    along its vertical midline; the two triangular doors rotate about their
    outer sides by theta = theta_scale * sqrt(eps), opening a crack that
    rises (sin theta)/2 out of the plane.  A vertical strip of width w is
    inserted into the flat band at the slit and folded into a planar plug
    whose vertical edges form a V isometric to the crack; the plug is glued
    into the crack.  The width w solves the closure equation numerically,
    so the whole construction is exactly piecewise isometric.
    """
    cfg = config or WrinkleConfig()
    if not (0.0 < epsilon <= 1e-2):
        raise StructureError("epsilon must lie in (0, 1e-2]")
    theta = cfg.theta_scale * math.sqrt(epsilon)
    o_l, o_r, gamma = _crack(theta)
    width, residual = _solve_plug_width(gamma, cfg.closure_tol, cfg.max_iter)
    c = _plug_crease_offset(width)
    half = width / 2.0
    lam = SQRT3 + width

    rot_l = rotation_about_line(BASE_L, APEX - BASE_L, theta)
    rot_r = rotation_about_line(BASE_R, APEX - BASE_R, -theta)
    plug = _PlugMap(width, o_l, o_r)

    def door_left(pts2: np.ndarray) -> np.ndarray:
        q = np.zeros(pts2.shape[:-1] + (3,))
        q[..., 0] = pts2[..., 0] + half
        q[..., 1] = pts2[..., 1] - 1.0
        return rot_l.apply(q)

    def door_right(pts2: np.ndarray) -> np.ndarray:
        q = np.zeros(pts2.shape[:-1] + (3,))
        q[..., 0] = pts2[..., 0] - half
        q[..., 1] = pts2[..., 1] - 1.0
        return rot_r.apply(q)

    n1, n2, n3, n4 = cfg.n_fan, cfg.n_door, cfg.n_plug_side, cfg.n_plug_mid
    x0w = -T_OPT - half   # top vertex of the left flap
    w0w = T_OPT + half    # top vertex of the right flap
    pieces = []

    # left fan (includes the cut bend and the left hinge)
    s = np.linspace(-(SIDE + half), -half, n1 + 1)
    pieces.append(_fan(
        s, np.full(n1 + 1, x0w),
        _fold_left(np.stack([s, np.zeros(n1 + 1)], axis=1), half),
        np.tile(BASE_L, (n1 + 1, 1)),
    ))
    # left door: fan from the bottom slit foot, sweeping hinge -> seam
    tops = np.linspace(x0w, -half, n2 + 1)[1:]
    pieces.append(_fan(
        np.full(n2, -half), tops,
        np.tile(APEX, (n2, 1)),
        door_left(np.stack([tops, np.ones(n2)], axis=1)),
    ))
    # plug, left piece: seam -> first crease
    bots = np.linspace(-half, -c, n3 + 1)[1:]
    tops = np.linspace(-half, 0.0, n3 + 1)[1:]
    pieces.append(_fan(
        bots, tops,
        plug(np.stack([bots, np.zeros(n3)], axis=1)),
        plug(np.stack([tops, np.ones(n3)], axis=1)),
    ))
    # plug, middle fan from the top midpoint: crease -> crease
    bots = np.linspace(-c, c, n4 + 1)[1:]
    pieces.append(_fan(
        bots, np.zeros(n4),
        plug(np.stack([bots, np.zeros(n4)], axis=1)),
        plug(np.tile([0.0, 1.0], (n4, 1))),
    ))
    # plug, right piece: crease -> seam
    bots = np.linspace(c, half, n3 + 1)[1:]
    tops = np.linspace(0.0, half, n3 + 1)[1:]
    pieces.append(_fan(
        bots, tops,
        plug(np.stack([bots, np.zeros(n3)], axis=1)),
        plug(np.stack([tops, np.ones(n3)], axis=1)),
    ))
    # right door: seam -> hinge
    tops = np.linspace(half, w0w, n2 + 1)[1:]
    pieces.append(_fan(
        np.full(n2, half), tops,
        np.tile(APEX, (n2, 1)),
        door_right(np.stack([tops, np.ones(n2)], axis=1)),
    ))
    # right fan, excluding the glued copy of the cut bend
    s = np.linspace(half, SIDE + half, n1 + 1)[1:-1]
    pieces.append(_fan(
        s, np.full(n1 - 1, w0w),
        _fold_right(np.stack([s, np.zeros(n1 - 1)], axis=1), half),
        np.tile(BASE_R, (n1 - 1, 1)),
    ))

    crack_height = 0.5 * math.sin(theta)
    meta = {
        "kind": "wrinkle",
        "epsilon": epsilon,
        "theta": theta,
        "gamma": gamma,
        "width": width,
        "crease_offset": c,
        "closure_residual": residual,
        "lambda": lam,
        "eps_excess": width,
        "excess_coeff": width / epsilon,
        "crack_height": crack_height,
    }
    return _assemble(lam, pieces, shift=SIDE + half, meta=meta)


# ---------------------------------------------------------------------------
# Derived geometry
# ---------------------------------------------------------------------------


def core_curve(band: RuledBand) -> PolylineLoop:
    """Closed polyline through the space midpoints of all bends."""
    mid = 0.5 * (band.space[:, 0] + band.space[:, 1])
    return PolylineLoop(mid, closed=True)


def boundary_polyline(band: RuledBand) -> PolylineLoop:
    """The image of the band boundary as a closed polyline.

    The boundary circle traverses the bottom feet in bend order, crosses
    the glued cut, then traverses the top feet in bend order.
    """
    return PolylineLoop(np.vstack([band.space[:, 0], band.space[:, 1]]), closed=True)


def sample_surface(band: RuledBand, eta: float) -> np.ndarray:
    """Sample every bend segment at spacing <= eta."""
    if not eta > 0.0:
        raise StructureError("eta must be positive")
    lengths = band.space_lengths()
    counts = np.maximum(1, np.ceil(lengths / eta).astype(int))
    out = []
    for seg, k in zip(band.space, counts):
        t = np.linspace(0.0, 1.0, k + 1)
        out.append(seg[0] + t[:, None] * (seg[1] - seg[0]))
    return np.vstack(out)


def surface_triangles(band: RuledBand) -> np.ndarray:
    """Triangulation of the ruled patches between consecutive bends
    (including the glued wrap patch): (2N, 3, 3) array."""
    g_flat, g_space = band.glued_first_bend()
    bot = np.vstack([band.space[:, 0], g_space[0][None, :]])
    top = np.vstack([band.space[:, 1], g_space[1][None, :]])
    a, b = bot[:-1], bot[1:]
    c, d = top[:-1], top[1:]
    tris = np.concatenate(
        [np.stack([a, b, d], axis=1), np.stack([a, d, c], axis=1)], axis=0
    )
    return tris


def points_to_triangles_distance(pts: np.ndarray, tris: np.ndarray,
                                 chunk: int = 8192) -> np.ndarray:
    """Exact distance from each point to the nearest of the given triangles.

    Distance to a triangle is the plane distance when the orthogonal
    projection falls inside, otherwise the distance to the nearest edge.
    Degenerate triangles fall back to edge distances.  Implemented with
    matrix products only (no (points, triangles, 3) temporaries).
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    tris = np.asarray(tris, dtype=float)
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    e0, e1 = b - a, c - a
    nrm = np.cross(e0, e1)
    nn = np.einsum("ij,ij->i", nrm, nrm)
    d00 = np.einsum("ij,ij->i", e0, e0)
    d01 = np.einsum("ij,ij->i", e0, e1)
    d11 = np.einsum("ij,ij->i", e1, e1)
    denom = d00 * d11 - d01 * d01
    ok = denom > 1e-24
    inv_denom = np.where(ok, 1.0 / np.where(ok, denom, 1.0), 0.0)
    a_e0 = np.einsum("ij,ij->i", a, e0)
    a_e1 = np.einsum("ij,ij->i", a, e1)
    a_n = np.einsum("ij,ij->i", a, nrm)
    n_scale = np.sqrt(np.where(nn > 0.0, nn, 1.0))

    e_a = np.concatenate([a, b, c], axis=0)
    e_v = np.concatenate([b - a, c - b, a - c], axis=0)
    e_vv = np.maximum(np.einsum("ij,ij->i", e_v, e_v), 1e-300)
    ea_v = np.einsum("ij,ij->i", e_a, e_v)
    ea_2 = np.einsum("ij,ij->i", e_a, e_a)

    out = np.empty(len(pts))
    for lo in range(0, len(pts), chunk):
        p = pts[lo:lo + chunk]
        p2 = np.einsum("ij,ij->i", p, p)
        # nearest point on each edge: d^2 = |p - (e_a + t e_v)|^2, t clipped
        pv = p @ e_v.T - ea_v[None, :]
        t = np.clip(pv / e_vv[None, :], 0.0, 1.0)
        d2 = (p2[:, None] - 2.0 * (p @ e_a.T) + ea_2[None, :]) - t * (
            2.0 * pv - t * e_vv[None, :]
        )
        d_edge = np.sqrt(np.maximum(d2.min(axis=1), 0.0))
        # plane distance where the projection lands inside a triangle
        dp0 = p @ e0.T - a_e0[None, :]
        dp1 = p @ e1.T - a_e1[None, :]
        s = (d11[None, :] * dp0 - d01[None, :] * dp1) * inv_denom[None, :]
        r = (d00[None, :] * dp1 - d01[None, :] * dp0) * inv_denom[None, :]
        # the slop routes points sitting exactly on an edge through the
        # cancellation-free plane branch (underestimates by <= 1e-12)
        inside = ok[None, :] & (s >= -1e-12) & (r >= -1e-12) & (s + r <= 1.0 + 1e-12)
        dist_plane = np.abs(p @ nrm.T - a_n[None, :]) / n_scale[None, :]
        d_int = np.where(inside, dist_plane, np.inf).min(axis=1)
        out[lo:lo + chunk] = np.minimum(d_edge, d_int)
    return out


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------


def transform(band: RuledBand, motion: RigidMotion) -> RuledBand:
    """Apply an ambient isometry to the space data."""
    space = motion.apply(band.space.reshape(-1, 3)).reshape(band.space.shape)
    return replace(band, space=space)


def flip(band: RuledBand) -> RuledBand:
    """Reverse the flat band's transverse orientation: (x, y) -> (x, 1 - y).

    This is an isometry of the flat band compatible with the glide
    identification; it negates the displacement of every bend.  Endpoint
    rows are swapped to keep the [bottom, top] convention and the
    development is re-anchored at the new bends[0] bottom endpoint.
    """
    flat = band.flat[:, ::-1, :].copy()
    flat[:, :, 1] = 1.0 - flat[:, :, 1]
    flat[:, :, 0] -= flat[0, 0, 0]
    space = band.space[:, ::-1, :].copy()
    return replace(band, flat=flat, space=space)


def redevelop(band: RuledBand, alpha: float) -> RuledBand:
    """Develop the band cut open along the (possibly interpolated) leaf at
    parameter alpha in [0, N).  Bends before the cut move past the far end
    of the development via the glide map."""
    n = band.n_bends
    alpha = float(alpha) % n
    i0 = int(math.ceil(alpha - 1e-12)) % n
    frac = alpha - math.floor(alpha)

    def glide(fl: np.ndarray, sp: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out = fl[::-1].copy()
        out[:, 0] = fl[::-1, 0] + band.lam
        out[:, 1] = 1.0 - fl[::-1, 1]
        return out, sp[::-1].copy()

    flats, spaces = [], []
    if frac > 1e-12:
        lf, ls = interpolate_bend(band, alpha)
        flats.append(lf)
        spaces.append(ls)
    order = list(range(i0, n)) + list(range(0, i0))
    n_tail = n - i0
    for k, i in enumerate(order):
        if k < n_tail:
            flats.append(band.flat[i].copy())
            spaces.append(band.space[i].copy())
        else:
            gf, gs = glide(band.flat[i], band.space[i])
            flats.append(gf)
            spaces.append(gs)
    flat = np.stack(flats)
    space = np.stack(spaces)
    flat[:, :, 0] -= flat[0, 0, 0]
    return replace(band, flat=flat, space=space, meta=None)


def interpolate_bend(band: RuledBand, p: float) -> tuple[np.ndarray, np.ndarray]:
    """Leaf of the foliation at fractional parameter p in [0, N], linearly
    interpolating endpoints between adjacent stored bends.  At p = N the
    glued copy of bends[0] is used, so the interpolation is continuous
    across the cut (with exchanged endpoints)."""
    n = band.n_bends
    if not (0.0 <= p <= n):
        raise StructureError("bend parameter out of range")
    i = int(math.floor(p))
    f = p - i
    if i >= n:
        i, f = n - 1, 1.0
    f0, s0 = band.flat[i], band.space[i]
    if i + 1 < n:
        f1, s1 = band.flat[i + 1], band.space[i + 1]
    else:
        f1, s1 = band.glued_first_bend()
    return (1.0 - f) * f0 + f * f1, (1.0 - f) * s0 + f * s1


def scale_bend(band: RuledBand, index: int, factor: float) -> RuledBand:
    """Copy of the band with one space segment scaled about its midpoint
    (an injected isometry defect, for negative controls)."""
    space = band.space.copy()
    mid = 0.5 * (space[index, 0] + space[index, 1])
    space[index] = mid + factor * (space[index] - mid)
    return replace(band, space=space, meta=None)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def to_json_dict(band: RuledBand) -> dict:
    mids = 0.5 * (band.flat[:, 0, 0] + band.flat[:, 1, 0])
    j = int(np.argmin(mids))
    out = band if j == 0 else redevelop(band, j)
    return {
        "format_version": FORMAT_VERSION,
        "lambda": out.lam,
        "closed": bool(out.closed),
        "bends": [
            {"flat": bf.tolist(), "space": bs.tolist()}
            for bf, bs in zip(out.flat, out.space)
        ],
    }


def write_json(band: RuledBand, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(band), fh, indent=1)
        fh.write("\n")


def from_json_dict(data: dict) -> RuledBand:
    try:
        version = data["format_version"]
        lam = float(data["lambda"])
        closed = bool(data.get("closed", True))
        bends = data["bends"]
        flat = np.array([b["flat"] for b in bends], dtype=float)
        space = np.array([b["space"] for b in bends], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed band file: {exc}") from exc
    if version != FORMAT_VERSION:
        raise StructureError(f"unsupported format_version {version!r}")
    return RuledBand(lam=lam, flat=flat, space=space, closed=closed)


def read_json(path) -> RuledBand:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StructureError(f"invalid JSON: {exc}") from exc
    return from_json_dict(data)
