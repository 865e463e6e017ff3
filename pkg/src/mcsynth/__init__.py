"""Synthesis for finite families of Markov chains.

A family fixes the states and leaves transition *targets* open behind
parameters with finite domains; assigning every parameter a value yields one
member chain.  Given threshold reachability properties (and optionally an
optimization objective), the drivers in :mod:`mcsynth.synthesis` find a
satisfying or optimal member by enumeration, conflict-driven pruning (CEGIS),
quotient-MDP abstraction refinement, or an adaptive hybrid of the latter two.
"""

from .counterexamples import (
    choose_to_expand,
    construct_conflict,
    minimal_conflict_oracle,
    reachable_via_holes,
    reroute,
    trivial_gamma,
)
from .errors import (
    ConvergenceError,
    InvalidBoundsError,
    McsynthError,
    PropertyError,
    ResourceCapError,
    SketchError,
)
from .model import (
    Conflict,
    Distribution,
    Family,
    Mc,
    Realization,
    Subfamily,
    count_unpruned,
    generalization,
    induce,
    iterate_unpruned,
    member_count,
)
from .quotient import BoundsVec, QuotientMdp, build_quotient, compute_bounds, split_subfamily
from .reach import (
    CostMeter,
    DECISION_ETA,
    DEFAULT_TOL,
    Objective,
    Property,
    Specification,
    evaluate_property,
    mc_reach,
    mc_reach_exact,
    mdp_extreme,
)
from .report import CeQualityReport, ce_quality_report
from .sketch import (
    generate_benchmark,
    parse_property,
    parse_sketch,
    parse_spec,
    serialize_sketch,
)
from .synthesis import (
    CheckSettings,
    HybridState,
    SynthesisResult,
    SynthStats,
    WorkItem,
    ar_run,
    ar_synthesize,
    cegis_phase,
    cegis_run,
    cegis_synthesize,
    hybrid_synthesize,
    new_state,
    one_by_one,
    optimal_synthesize,
    synthesize,
    update_delta,
)

__version__ = "0.1.0"

__all__ = [
    "BoundsVec",
    "CeQualityReport",
    "CheckSettings",
    "Conflict",
    "ConvergenceError",
    "CostMeter",
    "DECISION_ETA",
    "DEFAULT_TOL",
    "Distribution",
    "Family",
    "HybridState",
    "InvalidBoundsError",
    "Mc",
    "McsynthError",
    "Objective",
    "Property",
    "PropertyError",
    "QuotientMdp",
    "Realization",
    "ResourceCapError",
    "SketchError",
    "Specification",
    "Subfamily",
    "SynthStats",
    "SynthesisResult",
    "WorkItem",
    "ar_run",
    "ar_synthesize",
    "build_quotient",
    "ce_quality_report",
    "cegis_phase",
    "cegis_run",
    "cegis_synthesize",
    "choose_to_expand",
    "compute_bounds",
    "construct_conflict",
    "count_unpruned",
    "evaluate_property",
    "generalization",
    "generate_benchmark",
    "hybrid_synthesize",
    "induce",
    "iterate_unpruned",
    "mc_reach",
    "mc_reach_exact",
    "mdp_extreme",
    "member_count",
    "minimal_conflict_oracle",
    "new_state",
    "one_by_one",
    "optimal_synthesize",
    "parse_property",
    "parse_sketch",
    "parse_spec",
    "reachable_via_holes",
    "reroute",
    "serialize_sketch",
    "split_subfamily",
    "synthesize",
    "trivial_gamma",
    "update_delta",
]
