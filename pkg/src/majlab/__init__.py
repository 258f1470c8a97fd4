"""majlab: synchronous majority dynamics on odd-degree trees and graphs.

Exact worst-case stabilisation analysis with constructive witnesses,
stability predicates with certificates, and probability estimation by
exhaustive enumeration, Monte Carlo, and fixed-point bisection.
"""

__version__ = "0.1.0"

from .claims import (
    ALL_SUITES,
    ClaimReport,
    STRUCTURAL_SUITES,
    run_claim_suites,
    weak_definition_sweep,
)
from .dynamics import (
    OpinionVector,
    StabilisationResult,
    Trajectory,
    is_stable_partition,
    is_t_stable,
    stabilise,
    step,
    step_budget,
)
from .errors import (
    BadHostError,
    BadPathError,
    BadTimeError,
    BadVertexError,
    BudgetExceededError,
    DegreeParityError,
    InvariantViolationError,
    LengthMismatchError,
    MajlabError,
    NotATreeError,
    OpinionFormatError,
    PartitionError,
    TooSmallError,
    TreeFormatError,
)
from .probe import (
    FixedPointResult,
    McSummary,
    ProbEstimate,
    estimate_probability,
    fixed_point_q,
    le_t_positive_check,
    mc_tau,
    trial_seed,
)
from .stability import (
    EXTENSION_BUDGET,
    StabilityVerdict,
    is_le_t_stable,
    is_one_close_to_stability,
    is_strongly_t_stable,
    is_weakly_t_stable,
    le_t_stable_extreme_runs,
    strong_t_stable_extreme_runs,
)
from .treegen import random_even_size, random_odd_tree
from .trees import (
    GraphView,
    RootedTree,
    VertexClass,
    build_perfect_tree,
    classify_all,
    classify_vertex,
    load_tree,
    reroot,
    save_tree,
    tree_from_text,
    tree_to_text,
)
from .worstcase import (
    BRUTE_FORCE_BUDGET,
    CandidatePath,
    WorstCaseReport,
    active_path_bounds,
    brute_force_tau,
    worst_case_tau,
    worst_case_witness,
)

__all__ = [
    "__version__",
    "ALL_SUITES",
    "BRUTE_FORCE_BUDGET",
    "BadHostError",
    "BadPathError",
    "BadTimeError",
    "BadVertexError",
    "BudgetExceededError",
    "CandidatePath",
    "ClaimReport",
    "DegreeParityError",
    "EXTENSION_BUDGET",
    "FixedPointResult",
    "GraphView",
    "InvariantViolationError",
    "LengthMismatchError",
    "MajlabError",
    "McSummary",
    "NotATreeError",
    "OpinionFormatError",
    "OpinionVector",
    "PartitionError",
    "ProbEstimate",
    "RootedTree",
    "STRUCTURAL_SUITES",
    "StabilisationResult",
    "StabilityVerdict",
    "TooSmallError",
    "Trajectory",
    "TreeFormatError",
    "VertexClass",
    "WorstCaseReport",
    "active_path_bounds",
    "brute_force_tau",
    "build_perfect_tree",
    "classify_all",
    "classify_vertex",
    "estimate_probability",
    "fixed_point_q",
    "is_le_t_stable",
    "is_one_close_to_stability",
    "is_stable_partition",
    "is_strongly_t_stable",
    "is_t_stable",
    "is_weakly_t_stable",
    "le_t_positive_check",
    "le_t_stable_extreme_runs",
    "load_tree",
    "mc_tau",
    "random_even_size",
    "random_odd_tree",
    "reroot",
    "run_claim_suites",
    "save_tree",
    "stabilise",
    "step",
    "step_budget",
    "strong_t_stable_extreme_runs",
    "tree_from_text",
    "tree_to_text",
    "trial_seed",
    "weak_definition_sweep",
    "worst_case_tau",
    "worst_case_witness",
]
