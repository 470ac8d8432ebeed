"""Numeric search for T-patterns and pose normalization.

A T-pattern is a pair of disjoint bends whose carrier lines are
perpendicular and intersecting.  On the parameter circle of the bend
foliation (with fractional interpolation between stored bends) we zero the
residual pair

    F1(a, b) = u_a . u_b                  (perpendicularity)
    F2(a, b) = (m_b - m_a) . n / |n|      (signed common-perpendicular
                                           length, n = u_a x u_b)

by a coarse grid scan followed by bisection.  Both residuals flip sign
when a bend's orientation is reversed; traversing the full foliation once
returns to the first bend with reversed orientation, so the functions are
evaluated on the orientation double cover of the parameter circle.

Flat-folded bands are degenerate: whole sub-families of coplanar bends
make F2 vanish identically, so zeros of the pair come in one-parameter
families.  The normalization requirement that one segment contain the
line intersection in its interior while the other stays on one closed
side of it prunes these families down to finitely many valid patterns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .band import RuledBand, flip, interpolate_bend, redevelop, transform, validate
from .flatmodel import FlatTrapezoid
from .geom import (
    DEFAULT_TOL,
    RigidMotion,
    StructureError,
    ToleranceConfig,
    closest_line_params,
)

_DIAGONAL_EXCLUSION = 3  # minimal bend-step separation of a candidate pair
_FOOT_MARGIN = 1e-6      # relative margin classifying interior/endpoint feet


class NoTPatternError(StructureError):
    """The scan found no residual zero."""


@dataclass(frozen=True)
class TPattern:
    """A located T-pattern with its normalizing pose.

    param_t / param_b: foliation parameters of the two bends, with the
    T-role bend the one whose segment contains the line intersection in
    its interior and the B-role bend the one lying on one closed side.
    pose: isometry carrying the band to the normalized position: the
    T bend in the X-axis with its midpoint at the origin, the B bend in
    the negative ray of the Y-axis (exactly so when the two bends'
    intersection sits at the T midpoint, as for the generated bands).
    """

    param_t: float
    param_b: float
    bend_t_flat: np.ndarray
    bend_t_space: np.ndarray
    bend_b_flat: np.ndarray
    bend_b_space: np.ndarray
    residual_perp: float
    residual_offset: float
    pose: RigidMotion
    ray_pose: RigidMotion
    intersection: np.ndarray
    alternates: tuple = field(default=(), compare=False)

    @property
    def len_t(self) -> float:
        return float(np.linalg.norm(self.bend_t_space[1] - self.bend_t_space[0]))

    @property
    def len_b(self) -> float:
        return float(np.linalg.norm(self.bend_b_space[1] - self.bend_b_space[0]))


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _space_at(band: RuledBand, p: float) -> np.ndarray:
    """Space segment at lifted parameter p in [0, 2N); beyond N the
    orientation is reversed (double cover of the foliation circle)."""
    n = band.n_bends
    if p <= n:
        return interpolate_bend(band, p)[1]
    return interpolate_bend(band, p - n)[1][::-1]


def _flat_at(band: RuledBand, p: float) -> np.ndarray:
    n = band.n_bends
    if p <= n:
        return interpolate_bend(band, p)[0]
    f = interpolate_bend(band, p - n)[0][::-1].copy()
    f[:, 0] += band.lam
    f[:, 1] = 1.0 - f[:, 1]
    return f


def _dir_at(band: RuledBand, p: float) -> np.ndarray:
    s = _space_at(band, p)
    return _unit(s[1] - s[0])


def _perp_residual(band: RuledBand, a: float, b: float) -> float:
    return float(_dir_at(band, a) @ _dir_at(band, b))


def _offset_residual(band: RuledBand, a: float, b: float) -> float:
    sa = _space_at(band, a)
    sb = _space_at(band, b)
    ua = _unit(sa[1] - sa[0])
    ub = _unit(sb[1] - sb[0])
    n = np.cross(ua, ub)
    nn = np.linalg.norm(n)
    if nn < 1e-12:
        return math.inf
    ma = 0.5 * (sa[0] + sa[1])
    mb = 0.5 * (sb[0] + sb[1])
    return float((mb - ma) @ n / nn)


def _bisect_perp(band: RuledBand, a: float, lo: float, hi: float) -> float:
    f_lo = _perp_residual(band, a, lo)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        f_mid = _perp_residual(band, a, mid)
        if f_mid == 0.0:
            return mid
        if (f_lo < 0.0) == (f_mid < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class _Candidate:
    alpha: float
    beta: float
    perp: float
    offset: float
    seg_t_idx: int  # 1 if the alpha bend takes the T role, else 2
    len_t: float
    len_b: float
    p_star: np.ndarray
    foot_t: float
    foot_b: float


def _classify_roles(band: RuledBand, a: float, b: float) -> _Candidate | None:
    """Assign T/B roles by where the carrier lines meet: the T segment must
    contain the intersection strictly inside, the B segment must lie on one
    closed side of it."""
    sa = _space_at(band, a)
    sb = _space_at(band, b)
    ua, ub = _unit(sa[1] - sa[0]), _unit(sb[1] - sb[0])
    la = float(np.linalg.norm(sa[1] - sa[0]))
    lb = float(np.linalg.norm(sb[1] - sb[0]))
    try:
        s1, s2 = closest_line_params(sa[0], ua, sb[0], ub)
    except StructureError:
        return None
    r1, r2 = s1 / la, s2 / lb
    p_star = 0.5 * ((sa[0] + s1 * ua) + (sb[0] + s2 * ub))
    interior1 = _FOOT_MARGIN < r1 < 1.0 - _FOOT_MARGIN
    interior2 = _FOOT_MARGIN < r2 < 1.0 - _FOOT_MARGIN
    perp = float(ua @ ub)
    off = _offset_residual(band, a, b)
    if interior1 and not interior2:
        return _Candidate(a, b, perp, off, 1, la, lb, p_star, r1, r2)
    if interior2 and not interior1:
        return _Candidate(a, b, perp, off, 2, lb, la, p_star, r2, r1)
    return None


def _build_pose(bend_t_flat, bend_t_space, bend_b_space, p_star) -> tuple[RigidMotion, RigidMotion]:
    """Rotation/translation normalizing the pattern, plus the variant whose
    translation centers the T bend's midpoint at the origin."""
    t_raw = bend_t_flat[1, 0] - bend_t_flat[0, 0]
    if t_raw >= 0.0:
        w_pt, x_pt = bend_t_space[0], bend_t_space[1]
    else:
        w_pt, x_pt = bend_t_space[1], bend_t_space[0]
    ex = _unit(w_pt - x_pt)
    d0 = np.linalg.norm(bend_b_space - p_star, axis=1)
    near, far = (bend_b_space[0], bend_b_space[1]) if d0[0] <= d0[1] else (bend_b_space[1], bend_b_space[0])
    ey = near - far
    ey = ey - (ey @ ex) * ex
    ny = np.linalg.norm(ey)
    if ny < 1e-9:
        raise StructureError("degenerate T-pattern: collinear bends")
    ey = ey / ny
    ez = np.cross(ex, ey)
    ray_pose = RigidMotion.from_rows(ex, ey, ez, p_star)
    mid = ray_pose.apply(bend_t_space).mean(axis=0)
    pose = RigidMotion.translation_by([-mid[0], 0.0, 0.0]).compose(ray_pose)
    return pose, ray_pose


def find_tpattern(band: RuledBand, tol: ToleranceConfig = DEFAULT_TOL) -> TPattern:
    """Locate a T-pattern by grid scan plus bisection refinement.

    Zeros are ranked by decreasing B-bend length (ties by decreasing T-bend
    length, then lexicographically by parameters); the best valid zero is
    returned, the rest are reported as alternates.
    """
    report = validate(band, tol)
    if not report.passed:
        raise StructureError("band failed validation; no T-pattern search attempted")
    n = band.n_bends
    dirs = np.array([_dir_at(band, i) for i in range(n)])

    roots: list[tuple[float, float]] = []
    best_near = math.inf
    for a in range(n):
        u_a = dirs[a]
        betas = np.arange(a + _DIAGONAL_EXCLUSION, a + n - _DIAGONAL_EXCLUSION + 1)
        idx = betas % n
        sign = np.where(betas >= n, -1.0, 1.0)
        # lifted parameter n is the glued copy of bend 0 (reversed), which
        # the sign flip at betas >= n already encodes
        f1 = sign * (dirs[idx] @ u_a)
        for k in range(len(betas) - 1):
            if f1[k] == 0.0 or (f1[k] < 0.0) != (f1[k + 1] < 0.0):
                b = _bisect_perp(band, float(a), float(betas[k]), float(betas[k + 1]))
                roots.append((float(a), b))

    candidates: list[_Candidate] = []
    for a, b in roots:
        perp = _perp_residual(band, a, b)
        off = _offset_residual(band, a, b)
        best_near = min(best_near, math.hypot(perp, off))
        if abs(perp) > tol.root_residual or abs(off) > tol.root_residual:
            continue
        cand = _classify_roles(band, a, b)
        if cand is not None:
            candidates.append(cand)

    if not candidates:
        raise NoTPatternError(
            f"no T-pattern detected (minimal residual {best_near:.3e})"
        )

    def rank(c: _Candidate):
        return (-round(c.len_b / 1e-9), -round(c.len_t / 1e-9), c.alpha, c.beta)

    candidates.sort(key=rank)
    best = candidates[0]
    p_t, p_b = (best.alpha, best.beta) if best.seg_t_idx == 1 else (best.beta, best.alpha)
    p_t_mod = p_t % n
    p_b_mod = p_b % n
    bend_t_flat = _flat_at(band, p_t_mod)
    bend_t_space = _space_at(band, p_t_mod)
    bend_b_flat = _flat_at(band, p_b_mod)
    bend_b_space = _space_at(band, p_b_mod)
    pose, ray_pose = _build_pose(bend_t_flat, bend_t_space, bend_b_space, best.p_star)
    alternates = tuple(
        {
            "alpha": c.alpha,
            "beta": c.beta,
            "len_t": c.len_t,
            "len_b": c.len_b,
            "perp": c.perp,
            "offset": c.offset,
        }
        for c in candidates[1:]
    )
    return TPattern(
        param_t=p_t_mod,
        param_b=p_b_mod,
        bend_t_flat=bend_t_flat,
        bend_t_space=bend_t_space,
        bend_b_flat=bend_b_flat,
        bend_b_space=bend_b_space,
        residual_perp=best.perp,
        residual_offset=best.offset,
        pose=pose,
        ray_pose=ray_pose,
        intersection=best.p_star,
        alternates=alternates,
    )


def _move_pattern(tp: TPattern, motion: RigidMotion) -> TPattern:
    from dataclasses import replace

    return replace(
        tp,
        bend_t_space=motion.apply(tp.bend_t_space),
        bend_b_space=motion.apply(tp.bend_b_space),
        intersection=motion.apply(tp.intersection),
        pose=tp.pose.compose(motion.inverse()),
        ray_pose=tp.ray_pose.compose(motion.inverse()),
    )


def normalize_pose(band: RuledBand, tp: TPattern) -> tuple[RuledBand, TPattern]:
    """Apply the normalizing pose: T bend into the X-axis with its midpoint
    translated to the origin, B bend into the negative Y-ray."""
    if tp.len_t < 1e-12 or tp.len_b < 1e-12:
        raise StructureError("degenerate (zero-length) T-pattern bends")
    moved = transform(band, tp.pose)
    return moved, _move_pattern(tp, tp.pose)


def pose_residuals(tp: TPattern) -> dict:
    """Coordinate residuals of a (supposedly) normalized pattern."""
    t_sp = tp.bend_t_space
    b_sp = tp.bend_b_space
    return {
        "t_off_axis": float(np.abs(t_sp[:, 1:]).max()),
        "t_midpoint": float(np.abs(t_sp.mean(axis=0)).max()),
        "b_off_axis": float(np.abs(b_sp[:, [0, 2]]).max()),
        "b_above_axis": float(max(b_sp[:, 1].max(), 0.0)),
    }


def develop_for(band: RuledBand, tp: TPattern) -> tuple[FlatTrapezoid, RuledBand]:
    """Cut the band open along the T bend and develop it, re-orienting the
    flat band if needed so the cut displacement t is nonnegative.

    Returns the labeled trapezoid (u, v are the B-bend endpoints) and the
    re-developed band (space data unchanged up to row order)."""
    n = band.n_bends
    dev = redevelop(band, tp.param_t)
    cut_flat, _ = interpolate_bend(band, tp.param_t)
    x0 = cut_flat[0, 0]
    b_flat = tp.bend_b_flat.copy()
    if tp.param_b < tp.param_t:
        b_flat = b_flat[::-1].copy()
        b_flat[:, 0] += band.lam
        b_flat[:, 1] = 1.0 - b_flat[:, 1]
    b_flat[:, 0] -= x0

    t_raw = dev.cut_displacement()
    if t_raw < 0.0:
        shift = dev.flat[0, 1, 0]
        dev = flip(dev)
        b_flat = b_flat[::-1].copy()
        b_flat[:, 0] -= shift
        b_flat[:, 1] = 1.0 - b_flat[:, 1]

    t = dev.cut_displacement()
    v, u = b_flat[0], b_flat[1]
    trap = FlatTrapezoid(lam=band.lam, t=t, u=u, v=v)
    trap.check_invariants(atol=1e-9)
    return trap, dev


def unfold(band: RuledBand, tp: TPattern) -> FlatTrapezoid:
    """The trapezoid obtained by cutting the band open along the T bend."""
    trap, _ = develop_for(band, tp)
    return trap
