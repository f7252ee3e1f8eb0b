"""Instance-dependent lower-bound constants under 2/F/B, 2/B/B and 1/B feedback.

Each constant is the coefficient of ln T in the asymptotic regret lower bound
for the corresponding feedback model, in nats.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import AmbiguousOptimumError, BernoulliInstance
from .mathlib import kl_bernoulli, kl_bernoulli_vec

__all__ = [
    "BoundReport",
    "SweepRow",
    "constant_2fb",
    "constant_2bb",
    "constant_1b",
    "terms_2fb",
    "terms_2bb",
    "terms_1b",
    "min_divergence_2bb",
    "bound_report",
    "sweep_fig3",
    "SWEEP_OPTIMAL",
    "alpha_sweep_grid",
    "beta_sweep_grid",
    "write_sweep_csv",
]

GRID_POINTS = 2000
GOLDEN_RTOL = 1e-8
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def terms_2fb(instance: BernoulliInstance) -> np.ndarray:
    """Per-arm contributions to the 2/F/B constant.

    An arm contributes only when its prediction rate beats the optimal
    product; otherwise even a perfect channel cannot make it competitive.
    """
    star = instance.optimal_arm
    p_star = instance.products[star]
    gaps = instance.gaps
    terms = np.zeros(instance.n_arms)
    for i, (a, b) in enumerate(zip(instance.alpha, instance.beta)):
        if i == star or a <= p_star:
            continue
        terms[i] = gaps[i] / kl_bernoulli(b, p_star / a)
    return terms


def _objective_2bb(alpha_i: float, beta_i: float, p_star: float, x):
    # constraint x * y >= p_star taken as active: y = p_star / x
    return kl_bernoulli_vec(alpha_i, x) + kl_bernoulli_vec(beta_i, np.minimum(p_star / x, 1.0))


def min_divergence_2bb(alpha_i: float, beta_i: float, p_star: float) -> float:
    """min over x*y >= p_star, x, y in [0, 1] of d(alpha_i, x) + d(beta_i, y).

    The constraint binds for a suboptimal arm, so y = p_star / x and the
    problem reduces to one dimension on x in [p_star, 1]. A dense grid
    locates the basin and golden-section search refines it.
    """
    if alpha_i * beta_i >= p_star:
        return 0.0
    xs = np.linspace(p_star, 1.0, GRID_POINTS)
    vals = _objective_2bb(alpha_i, beta_i, p_star, xs)
    k = int(np.argmin(vals))
    best = float(vals[k])

    def f(x: float) -> float:
        return float(_objective_2bb(alpha_i, beta_i, p_star, np.array(x)))

    lo, hi = xs[max(k - 1, 0)], xs[min(k + 1, GRID_POINTS - 1)]
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > GOLDEN_RTOL * max(abs(c), 1e-12):
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    best = min(best, fc, fd)
    # x = alpha_i is feasible whenever alpha_i > p_star; keep it as a candidate
    if alpha_i > p_star:
        best = min(best, f(alpha_i))
    return best


def terms_2bb(instance: BernoulliInstance) -> np.ndarray:
    star = instance.optimal_arm
    p_star = instance.products[star]
    gaps = instance.gaps
    terms = np.zeros(instance.n_arms)
    for i, (a, b) in enumerate(zip(instance.alpha, instance.beta)):
        if i != star:
            terms[i] = gaps[i] / min_divergence_2bb(a, b, p_star)
    return terms


def terms_1b(instance: BernoulliInstance) -> np.ndarray:
    # d(alpha_i beta_i, .) increases above its first argument, so the
    # minimum over x*y >= p_star sits at x*y = p_star
    star = instance.optimal_arm
    prods = instance.products
    gaps = instance.gaps
    terms = np.zeros(instance.n_arms)
    for i in range(instance.n_arms):
        if i != star:
            terms[i] = gaps[i] / kl_bernoulli(prods[i], prods[star])
    return terms


def constant_2fb(instance: BernoulliInstance) -> float:
    return float(terms_2fb(instance).sum())


def constant_2bb(instance: BernoulliInstance) -> float:
    return float(terms_2bb(instance).sum())


def constant_1b(instance: BernoulliInstance) -> float:
    return float(terms_1b(instance).sum())


@dataclass(frozen=True)
class BoundReport:
    c_2fb: float
    c_2bb: float
    c_1b: float
    per_arm_terms: dict

    def scaled(self, factor: float) -> "BoundReport":
        return BoundReport(
            self.c_2fb * factor,
            self.c_2bb * factor,
            self.c_1b * factor,
            {k: v * factor for k, v in self.per_arm_terms.items()},
        )


def bound_report(instance: BernoulliInstance) -> BoundReport:
    t_fb, t_bb, t_1b = terms_2fb(instance), terms_2bb(instance), terms_1b(instance)
    return BoundReport(
        c_2fb=float(t_fb.sum()),
        c_2bb=float(t_bb.sum()),
        c_1b=float(t_1b.sum()),
        per_arm_terms={"2fb": t_fb, "2bb": t_bb, "1b": t_1b},
    )


@dataclass(frozen=True)
class SweepRow:
    alpha_sub: float
    beta_sub: float
    c_2fb: float = math.nan
    c_2bb: float = math.nan
    c_1b: float = math.nan
    status: str = "ok"


SWEEP_OPTIMAL = (0.8, 0.9)


def alpha_sweep_grid() -> list[tuple[float, float]]:
    """Suboptimal transmission rate fixed at 0.8, prediction rate varied."""
    return [(a, 0.8) for a in (0.75, 0.8, 0.85, 0.9)]


def beta_sweep_grid() -> list[tuple[float, float]]:
    """Suboptimal prediction rate fixed at 0.75, transmission rate varied."""
    return [(0.75, b) for b in (0.6, 0.7, 0.8, 0.9)]


def sweep_fig3(
    fixed: Sequence[float] = SWEEP_OPTIMAL,
    varying: Iterable[Sequence[float]] = (),
) -> list[SweepRow]:
    """Two-arm sweep: arm 0 has rates ``fixed``, arm 1 takes each pair in ``varying``.

    Rows whose instance has no unique optimum (or is otherwise invalid)
    are kept with a status string and NaN constants.
    """
    rows = []
    for a_sub, b_sub in varying:
        try:
            inst = BernoulliInstance((fixed[0], a_sub), (fixed[1], b_sub))
            rep = bound_report(inst)
        except AmbiguousOptimumError:
            rows.append(SweepRow(a_sub, b_sub, status="ambiguous_optimum"))
            continue
        except ValueError as exc:
            rows.append(SweepRow(a_sub, b_sub, status=f"invalid: {exc}"))
            continue
        rows.append(SweepRow(a_sub, b_sub, rep.c_2fb, rep.c_2bb, rep.c_1b))
    return rows


def write_sweep_csv(rows: Iterable[SweepRow], path: str | Path, *, log2: bool = False) -> None:
    """Write sweep rows with columns alpha_sub, beta_sub, c_2fb, c_2bb, c_1b, status.

    ``log2`` reports constants per bit of divergence, i.e. as coefficients
    of log2 T rather than ln T.
    """
    scale = math.log(2.0) if log2 else 1.0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["alpha_sub", "beta_sub", "c_2fb", "c_2bb", "c_1b", "status"])
        for r in rows:
            writer.writerow([r.alpha_sub, r.beta_sub, r.c_2fb * scale,
                             r.c_2bb * scale, r.c_1b * scale, r.status])
