"""Portion selection under two-level hybrid (full-information + bandit) feedback."""

from .core import AmbiguousOptimumError, BernoulliInstance, FeedbackModel, RunResult, reward_gap
from .harness import aggregate, regret_slope, run_replication, run_replications
from .theory import bound_report, constant_1b, constant_2bb, constant_2fb

__version__ = "0.1.0"

__all__ = [
    "AmbiguousOptimumError",
    "BernoulliInstance",
    "FeedbackModel",
    "RunResult",
    "reward_gap",
    "aggregate",
    "regret_slope",
    "run_replication",
    "run_replications",
    "bound_report",
    "constant_1b",
    "constant_2bb",
    "constant_2fb",
]
