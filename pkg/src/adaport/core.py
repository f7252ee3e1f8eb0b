"""Shared domain types: Bernoulli instances, feedback models, rounds and run records."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = [
    "OPTIMUM_TOL",
    "AmbiguousOptimumError",
    "BernoulliInstance",
    "FeedbackModel",
    "Feedback",
    "ObservationRound",
    "RunResult",
    "reward_gap",
    "load_instance",
]

# Two products closer than this are treated as a tie for the optimum.
OPTIMUM_TOL = 1e-12


class AmbiguousOptimumError(ValueError):
    """Raised when no unique arm maximises alpha_i * beta_i."""


@dataclass(frozen=True)
class BernoulliInstance:
    """Per-arm prediction rates ``alpha`` and transmission rates ``beta``."""

    alpha: tuple[float, ...]
    beta: tuple[float, ...]

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in self.alpha)
        beta = tuple(float(b) for b in self.beta)
        if len(alpha) != len(beta):
            raise ValueError(f"alpha has {len(alpha)} arms but beta has {len(beta)}")
        if len(alpha) < 2:
            raise ValueError("an instance needs at least two arms")
        for name, rates in (("alpha", alpha), ("beta", beta)):
            bad = [r for r in rates if not 0.0 <= r <= 1.0]
            if bad:
                raise ValueError(f"{name} entries must lie in [0, 1], got {bad}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @property
    def n_arms(self) -> int:
        return len(self.alpha)

    @property
    def products(self) -> np.ndarray:
        return np.asarray(self.alpha) * np.asarray(self.beta)

    @property
    def optimal_arm(self) -> int:
        """Index of the unique maximiser of alpha_i * beta_i.

        Raises :class:`AmbiguousOptimumError` if the top two products are
        within ``OPTIMUM_TOL`` of each other.
        """
        prods = self.products
        best = int(np.argmax(prods))
        others = np.delete(prods, best)
        if np.any(prods[best] - others <= OPTIMUM_TOL):
            raise AmbiguousOptimumError(
                f"no unique optimum: products {prods.tolist()} tie within {OPTIMUM_TOL}"
            )
        return best

    @property
    def gaps(self) -> np.ndarray:
        """Vector of reward gaps, zero at the optimal arm."""
        prods = self.products
        gaps = prods[self.optimal_arm] - prods
        gaps[self.optimal_arm] = 0.0
        return gaps

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "beta": list(self.beta)}

    @classmethod
    def from_dict(cls, data: dict) -> "BernoulliInstance":
        try:
            return cls(tuple(data["alpha"]), tuple(data["beta"]))
        except KeyError as exc:
            raise ValueError(f"instance document is missing key {exc}") from None


def load_instance(path: str | Path) -> BernoulliInstance:
    """Read an instance from a JSON file with ``alpha`` and ``beta`` arrays."""
    with open(path) as fh:
        return BernoulliInstance.from_dict(json.load(fh))


def reward_gap(instance: BernoulliInstance, i: int) -> float:
    """alpha*beta of the optimal arm minus alpha_i*beta_i."""
    if not 0 <= i < instance.n_arms:
        raise IndexError(f"arm {i} out of range for {instance.n_arms} arms")
    return float(instance.gaps[i])


class FeedbackModel(enum.Enum):
    """What the harness reveals to a policy after each round.

    ``ONE_B`` reveals only the product reward at the chosen arm, ``TWO_BB``
    reveals both outcomes at the chosen arm, and ``TWO_FB`` reveals the whole
    prediction-outcome vector plus the chosen arm's transmission outcome.
    """

    ONE_B = "1b"
    TWO_BB = "2bb"
    TWO_FB = "2fb"

    @classmethod
    def parse(cls, value: "str | FeedbackModel") -> "FeedbackModel":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("/", "").replace("-", "").replace("_", "")
        aliases = {"1b": cls.ONE_B, "oneb": cls.ONE_B, "2bb": cls.TWO_BB,
                   "twobb": cls.TWO_BB, "2fb": cls.TWO_FB, "twofb": cls.TWO_FB}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown feedback model {value!r}") from None

    @property
    def label(self) -> str:
        return {"1b": "1/B", "2bb": "2/B/B", "2fb": "2/F/B"}[self.value]


@dataclass(frozen=True)
class Feedback:
    """The view of one round a policy is allowed to see.

    Fields a feedback model withholds are ``None``. ``z`` is present under
    every model.
    """

    chosen: int
    z: int
    x_chosen: Optional[int] = None
    y_chosen: Optional[int] = None
    x_all: Optional[np.ndarray] = None


@dataclass
class ObservationRound:
    """Outcomes of every arm in one timeslot (``t`` is 1-based)."""

    t: int
    x_all: np.ndarray
    y_all: np.ndarray
    chosen: Optional[int] = None

    @property
    def y_chosen(self) -> int:
        return int(self.y_all[self._require_chosen()])

    @property
    def reward(self) -> int:
        c = self._require_chosen()
        return int(self.x_all[c]) * int(self.y_all[c])

    def _require_chosen(self) -> int:
        if self.chosen is None:
            raise ValueError("no arm has been chosen for this round")
        return self.chosen

    def reveal(self, model: FeedbackModel) -> Feedback:
        """Build the feedback view permitted by ``model``."""
        c = self._require_chosen()
        x_c, y_c = int(self.x_all[c]), int(self.y_all[c])
        if model is FeedbackModel.ONE_B:
            return Feedback(chosen=c, z=x_c * y_c)
        if model is FeedbackModel.TWO_BB:
            return Feedback(chosen=c, z=x_c * y_c, x_chosen=x_c, y_chosen=y_c)
        x_all = np.array(self.x_all, dtype=np.int8)
        x_all.flags.writeable = False
        return Feedback(chosen=c, z=x_c * y_c, x_chosen=x_c, y_chosen=y_c, x_all=x_all)


@dataclass
class RunResult:
    """Per-timeslot record of one seeded replication.

    ``cumulative_regret`` sums expected gaps on synthetic runs and realised
    oracle-minus-policy rewards on trace runs. ``choices`` holds the arm
    played in each slot.
    """

    cumulative_regret: np.ndarray
    failed_deliveries: np.ndarray
    arm_pull_counts: np.ndarray
    seed: int
    choices: np.ndarray = field(repr=False)
    policy: str = ""
    model: Optional[FeedbackModel] = None

    @property
    def horizon(self) -> int:
        return len(self.cumulative_regret)

    def pulls_at(self, t: int) -> np.ndarray:
        """Pull counts per arm over the first ``t`` slots."""
        if not 0 <= t <= self.horizon:
            raise ValueError(f"t={t} outside [0, {self.horizon}]")
        return np.bincount(self.choices[:t], minlength=len(self.arm_pull_counts))

