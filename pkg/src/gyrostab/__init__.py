"""Gyration stability for the projective planes CP^2, HP^2 and OP^2.

Exact symbolic computation in homotopy groups of spheres over a curated
relation dataset, deciding whether all k-gyrations of a projective plane
share one homotopy type and enumerating the types when they do not.
"""

from .abelian import (
    GroupElement,
    GroupPresentation,
    Subgroup,
    exponent,
    orbit_partition,
    reachable_set,
    subgroup_contains,
)
from .dataset import load
from .errors import GyrostabError, StuckError
from .gyration import (
    AttachingMap,
    SelfEquivalence,
    StabilityReport,
    Witness,
    classify,
    equivalent,
    table,
    theorem_a_check,
    twist_image,
)
from .rewrite import is_suspension_expr, normalize
from .validate import validate

__all__ = [
    "AttachingMap",
    "GroupElement",
    "GroupPresentation",
    "GyrostabError",
    "SelfEquivalence",
    "StabilityReport",
    "StuckError",
    "Subgroup",
    "Witness",
    "classify",
    "equivalent",
    "exponent",
    "is_suspension_expr",
    "load",
    "normalize",
    "orbit_partition",
    "reachable_set",
    "subgroup_contains",
    "table",
    "theorem_a_check",
    "twist_image",
    "validate",
]
