"""matchlab: exact and randomized perfect-matching statistics for complete
multipartite graphs with a deleted matching.

Exact big-integer strata, switching-graph audits, exactly uniform samplers,
and Poisson-distance post-processing, plus a deterministic CLI.
"""

from .model import (
    BudgetExceededError,
    ConstraintViolationError,
    DegenerateTripleError,
    EdgeCountVector,
    GeneralGraph,
    LabeledMatching,
    MatchingProfile,
    MatchlabError,
    MultipartiteShape,
    NotMatchedError,
    RegimeError,
    StratumTable,
    UnrealizableProfileError,
    VertexBudgetError,
    VertexId,
    overlap,
    partner,
    profile_of,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ConstraintViolationError",
    "DegenerateTripleError",
    "EdgeCountVector",
    "GeneralGraph",
    "LabeledMatching",
    "MatchingProfile",
    "MatchlabError",
    "MultipartiteShape",
    "NotMatchedError",
    "RegimeError",
    "StratumTable",
    "UnrealizableProfileError",
    "VertexBudgetError",
    "VertexId",
    "overlap",
    "partner",
    "profile_of",
    "__version__",
]
