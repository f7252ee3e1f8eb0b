import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adaport.core import BernoulliInstance
from adaport.environments import (
    CorrelatedSyntheticEnv,
    EndOfTrace,
    FeedbackMatrices,
    ReplayEnv,
    SyntheticEnv,
)


def _band(p, n, k=3.0):
    return k * math.sqrt(p * (1 - p) / n) + 1e-12


class TestSyntheticEnv:
    def test_degenerate_rates(self, rng):
        env = SyntheticEnv(BernoulliInstance((0.0, 1.0), (1.0, 0.0)), rng)
        m = env.block(500)
        assert np.all(m.x[:, 0] == 0) and np.all(m.x[:, 1] == 1)
        assert np.all(m.y[:, 0] == 1) and np.all(m.y[:, 1] == 0)

    @pytest.mark.parametrize("alpha, beta", [((0.8, 0.85), (0.9, 0.8)), ((0.3, 0.6, 0.95), (0.5, 0.1, 0.7))])
    def test_marginals(self, alpha, beta):
        n = 40_000
        m = SyntheticEnv(BernoulliInstance(alpha, beta), np.random.default_rng(3)).block(n)
        for i, (a, b) in enumerate(zip(alpha, beta)):
            assert abs(m.x[:, i].mean() - a) < _band(a, n)
            assert abs(m.y[:, i].mean() - b) < _band(b, n)

    def test_independence_of_x_and_y(self):
        n = 40_000
        m = SyntheticEnv(BernoulliInstance((0.6, 0.2), (0.5, 0.3)), np.random.default_rng(4)).block(n)
        joint = (m.x[:, 0] & m.y[:, 0]).mean()
        assert abs(joint - 0.3) < _band(0.3, n)

    def test_deterministic(self):
        inst = BernoulliInstance((0.4, 0.7), (0.6, 0.5))
        a = SyntheticEnv(inst, np.random.default_rng(9)).block(100)
        b = SyntheticEnv(inst, np.random.default_rng(9)).block(100)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)

    @pytest.mark.parametrize("cls", [SyntheticEnv, CorrelatedSyntheticEnv])
    def test_block_equals_rounds(self, cls):
        inst = BernoulliInstance((0.4, 0.7, 0.9), (0.6, 0.5, 0.2))
        m = cls(inst, np.random.default_rng(5)).block(50)
        env = cls(inst, np.random.default_rng(5))
        rounds = [env.next_round() for _ in range(50)]
        np.testing.assert_array_equal(m.x, np.array([r.x_all for r in rounds]))
        np.testing.assert_array_equal(m.y, np.array([r.y_all for r in rounds]))
        assert [r.t for r in rounds] == list(range(1, 51)) and env.t == 50

    def test_oracle_arm(self, rng):
        assert SyntheticEnv(BernoulliInstance((0.8, 0.9), (0.9, 0.7)), rng).oracle_arm() == 0


class TestCorrelatedEnv:
    def test_pattern_frequencies(self):
        n = 40_000
        env = CorrelatedSyntheticEnv(BernoulliInstance((0.5, 0.7, 0.9), (0.5, 0.5, 0.5)),
                                     np.random.default_rng(6))
        m = env.block(n)
        assert np.all(np.diff(m.x.astype(int), axis=1) >= 0)
        patterns = {(1, 1, 1): 0.5, (0, 1, 1): 0.2, (0, 0, 1): 0.2, (0, 0, 0): 0.1}
        rows = [tuple(r) for r in m.x]
        assert set(rows) <= set(patterns)
        for pat, p in patterns.items():
            assert abs(rows.count(pat) / n - p) < _band(p, n)

    def test_constant_alpha_gives_identical_columns(self, rng):
        m = CorrelatedSyntheticEnv(BernoulliInstance((0.6, 0.6, 0.6), (0.5, 0.5, 0.5)), rng).block(1000)
        assert np.all(m.x == m.x[:, :1])

    def test_marginals_calibrated(self):
        n = 40_000
        alpha = (0.2, 0.55, 0.8)
        m = CorrelatedSyntheticEnv(BernoulliInstance(alpha, (0.9, 0.4, 0.3)), np.random.default_rng(8)).block(n)
        for i, a in enumerate(alpha):
            assert abs(m.x[:, i].mean() - a) < _band(a, n)

    def test_requires_sorted_alpha(self, rng):
        with pytest.raises(ValueError):
            CorrelatedSyntheticEnv(BernoulliInstance((0.9, 0.5), (0.5, 0.5)), rng)


class TestFeedbackMatrices:
    def test_validation(self):
        with pytest.raises(ValueError):
            FeedbackMatrices(np.zeros((3, 2)), np.zeros((3, 3)))
        with pytest.raises(ValueError):
            FeedbackMatrices(np.full((2, 2), 2), np.zeros((2, 2)))

    def test_read_only(self):
        m = FeedbackMatrices(np.zeros((2, 2)), np.ones((2, 2)))
        with pytest.raises(ValueError):
            m.x[0, 0] = 1

    def test_nesting(self):
        x = np.array([[0, 1, 1], [1, 1, 1]])
        y = np.array([[1, 1, 0], [1, 0, 0]])
        assert FeedbackMatrices(x, y).is_nested()
        assert not FeedbackMatrices(x[:, ::-1], y).is_nested()

    def test_empty(self):
        m = FeedbackMatrices(np.zeros((0, 3)), np.zeros((0, 3)))
        assert m.t_count == 0 and m.n_arms == 3


class TestReplayEnv:
    def _matrices(self, seed=0, t=30, n=3):
        r = np.random.default_rng(seed)
        return FeedbackMatrices(r.random((t, n)) < 0.5, r.random((t, n)) < 0.5)

    def test_identity_replay(self):
        m = self._matrices()
        env = ReplayEnv(m)
        rows = list(env)
        np.testing.assert_array_equal(np.array([r.x_all for r in rows]), m.x)
        np.testing.assert_array_equal(np.array([r.y_all for r in rows]), m.y)

    def test_end_of_trace(self):
        env = ReplayEnv(self._matrices(t=2))
        env.next_round()
        env.next_round()
        with pytest.raises(EndOfTrace):
            env.next_round()

    def test_block_overrun(self):
        env = ReplayEnv(self._matrices(t=5))
        env.block(3)
        with pytest.raises(EndOfTrace):
            env.block(3)
        assert env.cursor == 3

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(1, 5), max_size=8))
    def test_cursor_monotone(self, sizes):
        m = self._matrices(t=40)
        env = ReplayEnv(m)
        last = 0
        for k in sizes:
            b = env.block(k)
            np.testing.assert_array_equal(b.x, m.x[last:last + k])
            assert env.cursor == last + k
            last = env.cursor
