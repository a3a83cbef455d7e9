"""condensa: finite metric spaces, covering numbers, and recursive
condensation hierarchies.

The library implements and empirically exercises a capacity-accounting
framework for streams: epsilon-covering numbers as the capacity measure,
quotient pseudometrics that contract validated regions into tokens,
constructive separating functions that survive compatible quotienting,
parity-partitioned parameter updates with exactly vanishing
cross-interference, and operation-count benchmarks contrasting recursive
search on flat stream geometry with navigation over the condensed tower.
"""

from .bench import (
    ActiveRegion,
    CostLedger,
    cost_scaling_report,
    fast_navigate,
    slow_verify,
)
from .cover import (
    CoverResult,
    cover_auto,
    covering_number_exact,
    covering_number_greedy,
    segment_capacity_curve,
)
from .generators import (
    SpiralDataset,
    gen_motif_stream,
    gen_noise_stream,
    gen_spiral,
    linear_probe_accuracy,
)
from .hierarchy import (
    CondensationPolicy,
    Hierarchy,
    Stream,
    build_hierarchy,
    depth_vs_length_experiment,
    required_depth,
    verify_telescoping,
)
from .parity import (
    MemoryFunctional,
    ParityState,
    PhaseUpdate,
    apply_phase,
    cross_interference_audit,
    forgetting_experiment,
    inner_product_g,
)
from .quotient import (
    Partition,
    QuotientSpace,
    Token,
    build_quotient,
    contract_region,
    quotient_distance_oracle,
)
from .separator import (
    FiberPartition,
    Separator,
    build_fiber_tower,
    classify_threshold,
    descend_separator,
    fiber_quotient,
    recursive_separation_check,
    urysohn_separator,
)
from .spaces import (
    EuclideanSpace,
    FiniteMetricSpace,
    PathSpace,
    SegmentSpace,
    diameter,
    validate_metric,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveRegion",
    "CondensationPolicy",
    "CostLedger",
    "CoverResult",
    "EuclideanSpace",
    "FiberPartition",
    "FiniteMetricSpace",
    "Hierarchy",
    "MemoryFunctional",
    "ParityState",
    "Partition",
    "PathSpace",
    "PhaseUpdate",
    "QuotientSpace",
    "SegmentSpace",
    "Separator",
    "SpiralDataset",
    "Stream",
    "Token",
    "apply_phase",
    "build_fiber_tower",
    "build_hierarchy",
    "build_quotient",
    "classify_threshold",
    "contract_region",
    "cost_scaling_report",
    "cover_auto",
    "covering_number_exact",
    "covering_number_greedy",
    "cross_interference_audit",
    "depth_vs_length_experiment",
    "descend_separator",
    "diameter",
    "fast_navigate",
    "fiber_quotient",
    "forgetting_experiment",
    "gen_motif_stream",
    "gen_noise_stream",
    "gen_spiral",
    "inner_product_g",
    "linear_probe_accuracy",
    "quotient_distance_oracle",
    "recursive_separation_check",
    "required_depth",
    "segment_capacity_curve",
    "slow_verify",
    "urysohn_separator",
    "validate_metric",
    "verify_telescoping",
]
