"""zonokit: zonotopic set computations, guaranteed state estimation, and
active fault diagnosis for discrete-time systems with bounded uncertainty."""

from .intervals import EMPTY, IntervalMatrix, IntervalVector, is_empty_interval
from .sets import (
    ConZonotope,
    HPolytope,
    LineZonotope,
    Strip,
    Zonotope,
    as_conzonotope,
    as_hpolytope,
    as_linezonotope,
    as_zonotope,
    convert,
    vertices_2d,
)
from .setops import (
    cartesian_product,
    closest_point,
    convex_hull,
    cz_inclusion,
    generalized_intersection,
    intersect_halfspaces_cz,
    intersect_strip_zon,
    lift,
    linmap,
    minkowski_sum,
    translate,
    unlift,
)
from .queries import (
    contains_points,
    hrep,
    interval_hull,
    is_empty,
    is_inside,
    permute,
    projection,
    radius,
    sample,
    volume,
)
from .reduction import (
    partope_bound,
    reduce_conzonotope,
    reduce_linezonotope,
    reduce_set,
    reduce_zonotope,
    rescale,
)
from .funcdag import (
    DagBuilder,
    FuncDAG,
    bind_inputs,
    eval_interval,
    eval_real,
    hessian_interval,
    jacobian,
)
from .optim import LinearProgram, MixedIntegerProgram, solve_lp, solve_milp

__version__ = "0.1.0"
