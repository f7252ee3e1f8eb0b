"""Portion-selection policies.

Every policy exposes ``select(rng) -> arm`` and ``update(feedback)``. The
harness hands ``update`` a :class:`~adaport.core.Feedback` built for the
policy's feedback model, so a policy cannot read outcomes its model hides.
Ties in every arg max go to the lowest index (``np.argmax`` semantics).
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .core import BernoulliInstance, Feedback, FeedbackModel

__all__ = [
    "Policy",
    "AdaPort",
    "TwoLevelTS",
    "OneLevelTS",
    "Exp3",
    "Heuristic",
    "Oracle",
    "default_exp3_gamma",
    "REGISTRY",
    "make_policy",
    "check_compatible",
    "policy_class",
]

# EXP3 weights are rescaled once the largest exceeds this.
EXP3_RENORM_AT = 1e100


class Policy:
    name: str = ""
    #: feedback models the policy can run under; ``None`` means any
    models: Optional[tuple[FeedbackModel, ...]] = None
    default_model: FeedbackModel = FeedbackModel.ONE_B

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise ValueError("need at least one arm")
        self.n_arms = n_arms

    def select(self, rng: np.random.Generator) -> int:
        raise NotImplementedError

    def update(self, feedback: Feedback) -> None:
        raise NotImplementedError


class AdaPort(Policy):
    """Empirical means for the full-information prediction outcomes, Thompson
    samples for the bandit transmission outcomes; plays arg max of their product.
    """

    name = "adaport"
    models = (FeedbackModel.TWO_FB,)
    default_model = FeedbackModel.TWO_FB

    def __init__(self, n_arms: int):
        super().__init__(n_arms)
        self.alpha_bar = np.zeros(n_arms)
        self.t = 1
        self.s_beta = np.zeros(n_arms, dtype=np.int64)
        self.f_beta = np.zeros(n_arms, dtype=np.int64)

    def scores(self, rng: np.random.Generator) -> np.ndarray:
        theta = rng.beta(self.s_beta + 1.0, self.f_beta + 1.0)
        return self.alpha_bar * theta

    def select(self, rng: np.random.Generator) -> int:
        return int(np.argmax(self.scores(rng)))

    def update(self, feedback: Feedback) -> None:
        if feedback.x_all is None or feedback.y_chosen is None:
            raise ValueError("AdaPort needs the full prediction vector and the chosen transmission outcome")
        x = np.asarray(feedback.x_all, dtype=float)
        self.alpha_bar += (x - self.alpha_bar) / self.t
        self.t += 1
        if feedback.y_chosen:
            self.s_beta[feedback.chosen] += 1
        else:
            self.f_beta[feedback.chosen] += 1

    @property
    def pulls(self) -> np.ndarray:
        return self.s_beta + self.f_beta


class TwoLevelTS(Policy):
    """Independent Beta posteriors on prediction and transmission rates, both fed
    by the chosen arm only; plays arg max of the product of the two samples.
    """

    name = "ts2bb"
    models = (FeedbackModel.TWO_BB,)
    default_model = FeedbackModel.TWO_BB

    def __init__(self, n_arms: int):
        super().__init__(n_arms)
        self.s_alpha = np.zeros(n_arms, dtype=np.int64)
        self.f_alpha = np.zeros(n_arms, dtype=np.int64)
        self.s_beta = np.zeros(n_arms, dtype=np.int64)
        self.f_beta = np.zeros(n_arms, dtype=np.int64)

    def scores(self, rng: np.random.Generator) -> np.ndarray:
        theta_a = rng.beta(self.s_alpha + 1.0, self.f_alpha + 1.0)
        theta_b = rng.beta(self.s_beta + 1.0, self.f_beta + 1.0)
        return theta_a * theta_b

    def select(self, rng: np.random.Generator) -> int:
        return int(np.argmax(self.scores(rng)))

    def update(self, feedback: Feedback) -> None:
        if feedback.x_chosen is None or feedback.y_chosen is None:
            raise ValueError("two-level TS needs both outcomes of the chosen arm")
        c = feedback.chosen
        if feedback.x_chosen:
            self.s_alpha[c] += 1
        else:
            self.f_alpha[c] += 1
        if feedback.y_chosen:
            self.s_beta[c] += 1
        else:
            self.f_beta[c] += 1

    @property
    def pulls(self) -> np.ndarray:
        return self.s_beta + self.f_beta


class OneLevelTS(Policy):
    """Bernoulli Thompson sampling on the product reward."""

    name = "ts1b"
    models = (FeedbackModel.ONE_B,)
    default_model = FeedbackModel.ONE_B

    def __init__(self, n_arms: int):
        super().__init__(n_arms)
        self.s_z = np.zeros(n_arms, dtype=np.int64)
        self.f_z = np.zeros(n_arms, dtype=np.int64)

    def scores(self, rng: np.random.Generator) -> np.ndarray:
        return rng.beta(self.s_z + 1.0, self.f_z + 1.0)

    def select(self, rng: np.random.Generator) -> int:
        return int(np.argmax(self.scores(rng)))

    def update(self, feedback: Feedback) -> None:
        if feedback.z:
            self.s_z[feedback.chosen] += 1
        else:
            self.f_z[feedback.chosen] += 1

    @property
    def pulls(self) -> np.ndarray:
        return self.s_z + self.f_z


def default_exp3_gamma(n_arms: int, horizon: Optional[int] = None) -> float:
    """Standard horizon-tuned exploration rate, or 0.1 without a horizon."""
    if horizon is None:
        return 0.1
    return min(1.0, math.sqrt(n_arms * math.log(n_arms) / ((math.e - 1.0) * horizon)))


class Exp3(Policy):
    """Exponential weights with importance-weighted rewards.

    Selection mixes the normalised weights with uniform exploration at rate
    ``gamma``; the arm is drawn by inverting the cumulative probabilities at
    one uniform variate.
    """

    name = "exp3"
    models = (FeedbackModel.ONE_B,)
    default_model = FeedbackModel.ONE_B

    def __init__(self, n_arms: int, gamma: Optional[float] = None, horizon: Optional[int] = None):
        super().__init__(n_arms)
        if gamma is None:
            gamma = default_exp3_gamma(n_arms, horizon)
        if not 0.0 < gamma <= 1.0:
            raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
        self.gamma = float(gamma)
        self.weights = np.ones(n_arms)

    def probabilities(self) -> np.ndarray:
        w = self.weights
        return (1.0 - self.gamma) * w / w.sum() + self.gamma / self.n_arms

    def select(self, rng: np.random.Generator) -> int:
        cdf = np.cumsum(self.probabilities())
        u = rng.random()
        return min(int(np.searchsorted(cdf, u, side="right")), self.n_arms - 1)

    def update(self, feedback: Feedback) -> None:
        c = feedback.chosen
        p_c = self.probabilities()[c]
        z_hat = feedback.z / p_c
        self.weights[c] *= math.exp(self.gamma * z_hat / self.n_arms)
        top = self.weights.max()
        if top > EXP3_RENORM_AT:
            self.weights /= top


class Heuristic(Policy):
    """Always sends the smallest portion (arm 0)."""

    name = "heuristic"

    def select(self, rng: np.random.Generator) -> int:
        return 0

    def update(self, feedback: Feedback) -> None:
        pass


class Oracle(Policy):
    """Clairvoyant static policy playing one fixed arm."""

    name = "oracle"

    def __init__(self, n_arms: int, arm: int):
        super().__init__(n_arms)
        if not 0 <= arm < n_arms:
            raise ValueError(f"arm {arm} out of range")
        self.arm = arm

    @classmethod
    def for_instance(cls, instance: BernoulliInstance) -> "Oracle":
        return cls(instance.n_arms, instance.optimal_arm)

    @classmethod
    def for_matrices(cls, x: np.ndarray, y: np.ndarray) -> "Oracle":
        """Best fixed arm in hindsight: largest total product reward."""
        totals = (np.asarray(x, dtype=np.int64) * np.asarray(y, dtype=np.int64)).sum(axis=0)
        return cls(len(totals), int(np.argmax(totals)))

    def select(self, rng: np.random.Generator) -> int:
        return self.arm

    def update(self, feedback: Feedback) -> None:
        pass


def _needs_env(cls) -> Callable:
    def factory(n_arms: int, horizon: Optional[int] = None, oracle_arm: Optional[int] = None, **_):
        if oracle_arm is None:
            raise ValueError("the oracle needs the environment's optimal arm")
        return cls(n_arms, oracle_arm)
    return factory


REGISTRY: dict[str, Callable[..., Policy]] = {
    "adaport": lambda n_arms, horizon=None, **_: AdaPort(n_arms),
    "ts1b": lambda n_arms, horizon=None, **_: OneLevelTS(n_arms),
    "ts2bb": lambda n_arms, horizon=None, **_: TwoLevelTS(n_arms),
    "exp3": lambda n_arms, horizon=None, gamma=None, **_: Exp3(n_arms, gamma=gamma, horizon=horizon),
    "heuristic": lambda n_arms, horizon=None, **_: Heuristic(n_arms),
    "oracle": _needs_env(Oracle),
}

POLICY_CLASSES: dict[str, type[Policy]] = {
    "adaport": AdaPort, "ts1b": OneLevelTS, "ts2bb": TwoLevelTS,
    "exp3": Exp3, "heuristic": Heuristic, "oracle": Oracle,
}


def make_policy(name: str, n_arms: int, **kwargs) -> Policy:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(REGISTRY)}") from None
    return factory(n_arms, **kwargs)


def policy_class(name: str) -> type[Policy]:
    try:
        return POLICY_CLASSES[name]
    except KeyError:
        raise ValueError(f"unknown policy {name!r}; choose from {sorted(REGISTRY)}") from None


def check_compatible(name: str, model: FeedbackModel) -> None:
    """Raise ``ValueError`` if policy ``name`` cannot run under ``model``."""
    allowed = policy_class(name).models
    if allowed is not None and model not in allowed:
        labels = ", ".join(m.label for m in allowed)
        raise ValueError(f"policy {name!r} requires {labels} feedback, got {model.label}")
