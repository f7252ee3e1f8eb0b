"""Seeded replications, feedback-visibility enforcement and regret metrics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .core import BernoulliInstance, FeedbackModel, RunResult
from .environments import CorrelatedSyntheticEnv, FeedbackMatrices, ReplayEnv, SyntheticEnv
from .policies import EXP3_RENORM_AT, Exp3, Policy, make_policy, policy_class

__all__ = [
    "Source",
    "MetricsSummary",
    "replication_rngs",
    "run_replication",
    "run_replications",
    "aggregate",
    "regret_slope",
    "log_checkpoints",
]

log = logging.getLogger(__name__)

Source = Union[BernoulliInstance, FeedbackMatrices]

_KERNELS: dict[str, Callable] = {
    "adaport": _kernels.run_adaport,
    "ts2bb": _kernels.run_ts2bb,
    "ts1b": _kernels.run_ts1b,
}


def replication_rngs(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent (environment, policy) generators for one replication seed.

    The environment stream depends only on the seed, so every policy run
    with the same seed faces the same outcomes.
    """
    env_ss, pol_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(pol_ss)


def _make_env(source: Source, env_rng: np.random.Generator, correlated: bool):
    if isinstance(source, BernoulliInstance):
        cls = CorrelatedSyntheticEnv if correlated else SyntheticEnv
        return cls(source, env_rng)
    if isinstance(source, FeedbackMatrices):
        return ReplayEnv(source)
    raise TypeError(f"unsupported source {type(source).__name__}")


def _result_from_choices(source: Source, env_outcomes: FeedbackMatrices, choices: np.ndarray,
                         seed: int, policy: str, model: Optional[FeedbackModel]) -> RunResult:
    x, y = env_outcomes.x, env_outcomes.y
    rows = np.arange(len(choices))
    z = x[rows, choices].astype(np.int64) * y[rows, choices]
    if isinstance(source, BernoulliInstance):
        increments = source.gaps[choices]
    else:
        best = source.oracle_arm()
        increments = (x[:, best].astype(np.int64) * y[:, best] - z).astype(float)
    return RunResult(
        cumulative_regret=np.cumsum(increments),
        failed_deliveries=np.cumsum(1 - z),
        arm_pull_counts=np.bincount(choices, minlength=x.shape[1]),
        seed=seed,
        choices=choices.astype(np.int8 if x.shape[1] < 128 else np.int64),
        policy=policy,
        model=model,
    )


def run_replication(
    source: Source,
    policy: Union[str, Policy],
    model: Union[FeedbackModel, str, None] = None,
    horizon: Optional[int] = None,
    seed: int = 0,
    *,
    correlated: bool = False,
    fast: bool = True,
    policy_kwargs: Optional[dict] = None,
) -> RunResult:
    """Play ``policy`` against ``source`` for ``horizon`` slots.

    ``source`` is either a synthetic instance or trace feedback matrices
    (whose length is the default horizon). ``policy`` is a registry name or
    a ready policy object. On synthetic runs regret accrues the expected
    gap of each chosen arm; on traces it accrues the realised reward of the
    best fixed arm in hindsight minus the policy's reward.

    With ``fast`` set and a registry name that has a compiled loop, the run
    is done in one kernel call; the result is identical to the step-by-step
    path.
    """
    if isinstance(policy, str):
        name = policy
        cls = policy_class(name)
        allowed, default = cls.models, cls.default_model
    else:
        name, allowed, default = policy.name, policy.models, policy.default_model
    model = default if model is None else FeedbackModel.parse(model)
    if allowed is not None and model not in allowed:
        labels = ", ".join(m.label for m in allowed)
        raise ValueError(f"policy {name!r} requires {labels} feedback, got {model.label}")

    if horizon is None:
        if not isinstance(source, FeedbackMatrices):
            raise ValueError("synthetic runs need a horizon")
        horizon = source.t_count
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if isinstance(source, FeedbackMatrices) and horizon > source.t_count:
        raise ValueError(f"horizon {horizon} exceeds trace length {source.t_count}")

    env_rng, pol_rng = replication_rngs(seed)
    env = _make_env(source, env_rng, correlated)
    oracle_arm = env.oracle_arm()
    kwargs = dict(policy_kwargs or {})

    if isinstance(policy, str) and fast:
        outcomes = env.block(horizon)
        if name in _KERNELS:
            choices = _KERNELS[name](outcomes.x, outcomes.y, pol_rng)
        elif name == "exp3":
            proto = Exp3(env.n_arms, gamma=kwargs.get("gamma"), horizon=horizon)
            choices = _kernels.run_exp3(outcomes.x, outcomes.y, pol_rng, proto.gamma, EXP3_RENORM_AT)
        elif name == "heuristic":
            choices = np.zeros(horizon, dtype=np.int64)
        else:
            choices = np.full(horizon, oracle_arm, dtype=np.int64)
        return _result_from_choices(source, outcomes, choices, seed, name, model)

    if isinstance(policy, str):
        policy = make_policy(name, env.n_arms, horizon=horizon, oracle_arm=oracle_arm, **kwargs)
    xs = np.empty((horizon, env.n_arms), dtype=np.uint8)
    ys = np.empty((horizon, env.n_arms), dtype=np.uint8)
    choices = np.empty(horizon, dtype=np.int64)
    for t in range(horizon):
        arm = policy.select(pol_rng)
        rnd = env.next_round()
        rnd.chosen = arm
        policy.update(rnd.reveal(model))
        xs[t], ys[t], choices[t] = rnd.x_all, rnd.y_all, arm
    return _result_from_choices(source, FeedbackMatrices(xs, ys), choices, seed, name, model)


def run_replications(source: Source, policy: str, model=None, horizon: Optional[int] = None,
                     replications: int = 50, base_seed: int = 0, **kwargs) -> list[RunResult]:
    """Replication ``r`` uses seed ``base_seed + r``."""
    return [run_replication(source, policy, model, horizon, base_seed + r, **kwargs)
            for r in range(replications)]


def log_checkpoints(horizon: int, count: int = 50) -> np.ndarray:
    """Strictly increasing, roughly log-spaced slots in [2, horizon]."""
    if horizon < 2:
        return np.array([], dtype=np.int64)
    pts = np.unique(np.round(np.logspace(math.log10(2), math.log10(horizon), count)).astype(np.int64))
    return pts[(pts >= 2) & (pts <= horizon)]


@dataclass
class MetricsSummary:
    """Replication-averaged curves and summary metrics for one policy."""

    mean_regret: np.ndarray
    stderr_regret: np.ndarray
    mean_failed: np.ndarray
    relative_degradation: float
    degradation_excluded: int
    checkpoints: np.ndarray
    regret_over_logT: np.ndarray
    mean_pulls: np.ndarray
    replications: int
    mean_pulls_at: dict = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.mean_regret)

    @property
    def degradation_defined(self) -> bool:
        return not math.isnan(self.relative_degradation)


def _degradation(results: Sequence[RunResult], oracle: Sequence[RunResult]) -> tuple[float, int]:
    ratios = []
    excluded = 0
    for res, opt in zip(results, oracle):
        opt_fail = int(opt.failed_deliveries[-1])
        if opt_fail == 0:
            excluded += 1
            continue
        ratios.append((int(res.failed_deliveries[-1]) - opt_fail) / opt_fail)
    return (float(np.mean(ratios)) if ratios else math.nan), excluded


def aggregate(
    results: Sequence[RunResult],
    oracle_result: Union[RunResult, Sequence[RunResult], None] = None,
    *,
    pull_checkpoints: Iterable[int] = (),
) -> MetricsSummary:
    """Mean and standard-error curves plus relative throughput degradation.

    ``oracle_result`` is one run (used for every replication) or one run per
    replication, paired by position. Replications whose oracle had no
    failures give an undefined ratio; they are dropped from the mean and
    counted in ``degradation_excluded``.
    """
    if not results:
        raise ValueError("no results to aggregate")
    horizon = results[0].horizon
    if any(r.horizon != horizon for r in results):
        raise ValueError("all results must share one horizon")
    regret = np.stack([r.cumulative_regret for r in results])
    failed = np.stack([r.failed_deliveries for r in results]).astype(float)
    n = len(results)
    mean = regret.mean(axis=0)
    stderr = regret.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros(horizon)

    if oracle_result is None:
        degradation, excluded = math.nan, 0
    else:
        if isinstance(oracle_result, RunResult):
            oracle_result = [oracle_result] * n
        if len(oracle_result) != n:
            raise ValueError("need one oracle run per replication")
        if any(o.horizon != horizon for o in oracle_result):
            raise ValueError("oracle horizon differs from the results")
        degradation, excluded = _degradation(results, oracle_result)

    checkpoints = log_checkpoints(horizon)
    pulls = np.mean([r.arm_pull_counts for r in results], axis=0)
    pulls_at = {int(t): np.mean([r.pulls_at(int(t)) for r in results], axis=0)
                for t in pull_checkpoints}
    return MetricsSummary(
        mean_regret=mean,
        stderr_regret=stderr,
        mean_failed=failed.mean(axis=0),
        relative_degradation=degradation,
        degradation_excluded=excluded,
        checkpoints=checkpoints,
        regret_over_logT=mean[checkpoints - 1] / np.log(checkpoints),
        mean_pulls=pulls,
        replications=n,
        mean_pulls_at=pulls_at,
    )


def regret_slope(summary: MetricsSummary, window: tuple[int, int]) -> float:
    """(R(T2) - R(T1)) / (ln T2 - ln T1) on the mean regret curve."""
    t1, t2 = window
    if not 1 <= t1 < t2 <= summary.horizon:
        raise ValueError(f"window {window} must satisfy 1 <= T1 < T2 <= {summary.horizon}")
    r = summary.mean_regret
    return float((r[t2 - 1] - r[t1 - 1]) / (math.log(t2) - math.log(t1)))
