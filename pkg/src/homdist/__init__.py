"""Homotopic distance between maps, realized by piecewise motion planners.

Geometry of the catalog manifolds lives in :mod:`homdist.manifold`, Morse-Bott
navigation functions and their flows in :mod:`homdist.morse`, cut loci in
:mod:`homdist.cutlocus`, planners in :mod:`homdist.planner`, bound
bookkeeping in :mod:`homdist.distance` and scenario files plus the command
line in :mod:`homdist.scenarios`.
"""

from .errors import (
    AuditError, ConfigurationError, ContractError, CoverageError, DomainError, HomdistError,
)
from .manifold import (
    Circle, Euclidean, GeodesicSegment, ManifoldSpec, Minimizers, Path, Point, Product,
    RealProjective, Sphere, TangentVector, Torus, concatenate_paths, exp_map, minimizing_geodesics,
    riemannian_distance,
)
from .submanifold import AntipodalGraph, Custom, Diagonal, SinglePoint, Subtorus, SubmanifoldSpec, whole
from .morse import (
    FlowResult, FlowSettings, NavigationFunction, arc_length_reparametrize, basin_assignment,
    negative_gradient_flow, torus_cosine,
)
from .cutlocus import (
    CutLocusDescriptor, GridSpec, cut_locus_analytic, detect_separation_points, distance_to_submanifold,
    n_segments, squared_distance_function,
)
from .planner import (
    GeneralizedPlanner, LocalContext, MapSpec, PlannerPiece, build_cutlocus_planner,
    build_direct_planner, build_morse_bott_planner, continuity_audit, coverage_audit, endpoint_audit,
    enlarge_piece, plan, plan_many, standard_local_planners,
)
from .distance import (
    REFERENCES, BoundReport, ReferenceTable, check_cutlocus_inequality, check_morse_bott_inequality,
    components_max_rule, upper_bound_from_planner, weak_category_circle,
)

__version__ = "0.1.0"
