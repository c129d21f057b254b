"""Group formation under pairwise compatibilities and learning of score orderings."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Objective,
    Partition,
    argsort_desc,
    evaluate_objective,
    happiness,
    min_pair,
    score_matrix,
    validate_partition,
)
from .errors import (  # noqa: E402
    BudgetExhaustedError,
    ConfigError,
    InstanceTooLargeError,
    InvalidInputError,
    NotAvailableError,
    PartilabError,
    PreconditionError,
)
from .general_solvers import (  # noqa: E402
    brute_force_optimal,
    is_transitive,
    solve_k2_avg,
    solve_k2_min,
    transitive_mom,
)
from .learner import LearnConfig, learn_order  # noqa: E402
from .score_solvers import greedy_moa, heterophilous_partition, homophilous_partition  # noqa: E402
from .simenv import FeedbackEnv, NoiseModel  # noqa: E402

__all__ = [
    "BudgetExhaustedError", "ConfigError", "FeedbackEnv", "InstanceTooLargeError",
    "InvalidInputError", "LearnConfig", "NoiseModel", "NotAvailableError", "Objective",
    "Partition", "PartilabError", "PreconditionError", "argsort_desc", "brute_force_optimal",
    "evaluate_objective", "greedy_moa", "happiness", "heterophilous_partition",
    "homophilous_partition", "is_transitive", "learn_order", "min_pair", "score_matrix",
    "solve_k2_avg", "solve_k2_min", "transitive_mom", "validate_partition",
]
