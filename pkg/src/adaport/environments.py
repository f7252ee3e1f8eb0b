"""Outcome generators: i.i.d. Bernoulli environments and feedback-matrix replay."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BernoulliInstance, ObservationRound

__all__ = [
    "EndOfTrace",
    "FeedbackMatrices",
    "SyntheticEnv",
    "CorrelatedSyntheticEnv",
    "ReplayEnv",
]


class EndOfTrace(Exception):
    """Raised when a replay environment has served its last row."""


@dataclass(frozen=True)
class FeedbackMatrices:
    """Per-slot prediction (``x``) and transmission (``y``) outcomes, shape (T, N)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.ascontiguousarray(self.x, dtype=np.uint8)
        y = np.ascontiguousarray(self.y, dtype=np.uint8)
        if x.ndim != 2 or x.shape != y.shape:
            raise ValueError(f"x and y must be equal-shape 2-D arrays, got {x.shape} and {y.shape}")
        if x.size and (x.max() > 1 or y.max() > 1):
            raise ValueError("feedback matrices must be binary")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def t_count(self) -> int:
        return self.x.shape[0]

    @property
    def n_arms(self) -> int:
        return self.x.shape[1]

    def is_nested(self) -> bool:
        """True when every x row is nondecreasing and every y row nonincreasing."""
        return bool(np.all(np.diff(self.x.astype(np.int8), axis=1) >= 0)
                    and np.all(np.diff(self.y.astype(np.int8), axis=1) <= 0))

    def oracle_arm(self) -> int:
        totals = (self.x.astype(np.int64) * self.y).sum(axis=0)
        return int(np.argmax(totals))


class SyntheticEnv:
    """Independent Bernoulli prediction and transmission outcomes per arm.

    Each round consumes ``2 * N`` uniforms from ``rng``: N for the prediction
    outcomes, then N for the transmission outcomes.
    """

    def __init__(self, instance: BernoulliInstance, rng: np.random.Generator):
        self.instance = instance
        self.rng = rng
        self._alpha = np.asarray(instance.alpha)
        self._beta = np.asarray(instance.beta)
        self.t = 0

    @property
    def n_arms(self) -> int:
        return self.instance.n_arms

    def oracle_arm(self) -> int:
        return self.instance.optimal_arm

    def _draw(self, n_rounds: int) -> tuple[np.ndarray, np.ndarray]:
        u = self.rng.random((n_rounds, 2, self.n_arms))
        return ((u[:, 0] < self._alpha).astype(np.uint8),
                (u[:, 1] < self._beta).astype(np.uint8))

    def next_round(self) -> ObservationRound:
        x, y = self._draw(1)
        self.t += 1
        return ObservationRound(self.t, x[0], y[0])

    def block(self, n_rounds: int) -> FeedbackMatrices:
        """The next ``n_rounds`` rounds at once; same stream as repeated ``next_round``."""
        x, y = self._draw(n_rounds)
        self.t += n_rounds
        return FeedbackMatrices(x, y)


class CorrelatedSyntheticEnv(SyntheticEnv):
    """Nested prediction outcomes driven by one shared error magnitude per round.

    With arms ordered by size, arm i covers the viewport iff a Uniform(0, 1)
    magnitude falls below ``alpha_i``, so marginals equal ``alpha`` and every
    x row is nondecreasing. Transmission outcomes stay independent.
    Each round consumes ``1 + N`` uniforms.
    """

    def __init__(self, instance: BernoulliInstance, rng: np.random.Generator):
        if np.any(np.diff(instance.alpha) < 0):
            raise ValueError("correlated outcomes need alpha nondecreasing in arm order")
        super().__init__(instance, rng)

    def _draw(self, n_rounds: int) -> tuple[np.ndarray, np.ndarray]:
        u = self.rng.random((n_rounds, 1 + self.n_arms))
        x = (u[:, :1] < self._alpha).astype(np.uint8)
        y = (u[:, 1:] < self._beta).astype(np.uint8)
        return x, y


class ReplayEnv:
    """Serves rows of precomputed feedback matrices in order, without wrapping."""

    def __init__(self, matrices: FeedbackMatrices):
        self.matrices = matrices
        self.cursor = 0

    @property
    def n_arms(self) -> int:
        return self.matrices.n_arms

    def oracle_arm(self) -> int:
        return self.matrices.oracle_arm()

    def next_round(self) -> ObservationRound:
        if self.cursor >= self.matrices.t_count:
            raise EndOfTrace(f"trace exhausted after {self.cursor} rounds")
        row = self.cursor
        self.cursor += 1
        return ObservationRound(self.cursor, self.matrices.x[row], self.matrices.y[row])

    def block(self, n_rounds: int) -> FeedbackMatrices:
        end = self.cursor + n_rounds
        if end > self.matrices.t_count:
            raise EndOfTrace(
                f"requested {n_rounds} rounds but only {self.matrices.t_count - self.cursor} remain")
        m = FeedbackMatrices(self.matrices.x[self.cursor:end], self.matrices.y[self.cursor:end])
        self.cursor = end
        return m

    def __iter__(self):
        while self.cursor < self.matrices.t_count:
            yield self.next_round()
