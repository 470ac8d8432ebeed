"""Discrete paper Moebius bands: generators, margin checkers and
effective-bound verifiers for nearly-optimal aspect ratios."""

from .band import (
    RuledBand,
    ValidationReport,
    WrinkleConfig,
    boundary_polyline,
    build_triangular,
    build_wrinkle,
    core_curve,
    read_json,
    sample_surface,
    transform,
    validate,
    write_json,
)
from .bounds import (
    CurveGraphPair,
    MarginReport,
    PerturbedTriangle,
    graph_check,
    offset1_check,
    sq0_margin,
    sq1_margin,
    wiggle_check,
)
from .flatmodel import FlatBand, FlatTrapezoid, boundary_edges, make_trapezoid
from .geom import (
    DEFAULT_TOL,
    PolylineLoop,
    RigidMotion,
    StructureError,
    ToleranceConfig,
    hausdorff_distance,
    winding_number,
)
from .tpattern import NoTPatternError, TPattern, find_tpattern, normalize_pose, unfold
from .verify import (
    OutOfScopeError,
    TheoremReport,
    boundary_deviation,
    verify_all,
    verify_corollary,
    verify_eff,
    verify_eff2,
)

__version__ = "0.1.0"
