"""Experiment configuration, batch runs and CSV/SVG output."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import BernoulliInstance, FeedbackModel, load_instance
from .environments import FeedbackMatrices
from .harness import MetricsSummary, aggregate, regret_slope, run_replication, run_replications
from .policies import check_compatible, policy_class
from .traces import (
    DEFAULT_INTERVAL_S,
    PortionSpec,
    build_matrices,
    bundled_trace,
    default_portions,
    read_bandwidth_csv,
    read_pose_csv,
)

__all__ = ["PolicySpec", "ExperimentConfig", "load_config", "build_source", "run_experiment",
           "write_outputs"]

log = logging.getLogger(__name__)

DEFAULT_REPLICATIONS = 50


@dataclass(frozen=True)
class PolicySpec:
    name: str
    model: FeedbackModel

    @classmethod
    def parse(cls, item) -> "PolicySpec":
        if isinstance(item, str):
            name, model = item, None
        else:
            name, model = item["name"], item.get("feedback")
        model = policy_class(name).default_model if model is None else FeedbackModel.parse(model)
        check_compatible(name, model)
        return cls(name, model)


@dataclass
class ExperimentConfig:
    """One batch of replications over a synthetic instance or a trace.

    Exactly one of ``instance`` and the trace fields is used: a config with
    an ``instance`` is synthetic, otherwise poses/bandwidth (or a bundled
    rate) define a trace run.
    """

    policies: list[PolicySpec]
    horizon: Optional[int] = None
    replications: int = DEFAULT_REPLICATIONS
    base_seed: int = 0
    output: Optional[Path] = None
    instance: Optional[BernoulliInstance] = None
    correlated: bool = False
    poses: Optional[Path] = None
    bandwidth: Optional[Path] = None
    bundled: Optional[str] = None
    portions: list[PortionSpec] = field(default_factory=default_portions)
    interval_s: float = DEFAULT_INTERVAL_S
    slope_window: Optional[tuple[int, int]] = None
    exp3_gamma: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.policies:
            raise ValueError("config lists no policies")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        if self.horizon is not None and self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.instance is None and self.bundled is None and (self.poses is None or self.bandwidth is None):
            raise ValueError("config needs an instance, a bundled trace, or pose and bandwidth files")

    @property
    def is_synthetic(self) -> bool:
        return self.instance is not None


def load_config(path: str | Path, **overrides) -> ExperimentConfig:
    """Parse a JSON config; keyword overrides that are not None win over the file."""
    path = Path(path)
    with open(path) as fh:
        doc = json.load(fh)
    return config_from_dict(doc, base_dir=path.parent, **overrides)


def config_from_dict(doc: dict, base_dir: Path = Path("."), **overrides) -> ExperimentConfig:
    def rel(p):
        return None if p is None else (base_dir / p if not Path(p).is_absolute() else Path(p))

    instance = doc.get("instance")
    if isinstance(instance, str):
        instance = load_instance(rel(instance))
    elif isinstance(instance, dict):
        instance = BernoulliInstance.from_dict(instance)
    trace = doc.get("trace", {})
    portions = doc.get("portions")
    portions = default_portions() if portions is None else [PortionSpec(**p) for p in portions]
    window = doc.get("slope_window")
    kwargs = dict(
        policies=[PolicySpec.parse(p) for p in doc.get("policies", [])],
        horizon=doc.get("horizon"),
        replications=doc.get("replications", DEFAULT_REPLICATIONS),
        base_seed=doc.get("base_seed", 0),
        output=rel(doc.get("output")),
        instance=instance,
        correlated=bool(doc.get("correlated", False)),
        poses=rel(trace.get("poses")),
        bandwidth=rel(trace.get("bandwidth")),
        bundled=None if trace.get("bundled") is None else str(trace["bundled"]),
        portions=portions,
        interval_s=doc.get("interval_s", DEFAULT_INTERVAL_S),
        slope_window=None if window is None else (int(window[0]), int(window[1])),
        exp3_gamma=doc.get("exp3_gamma"),
    )
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**kwargs)


def build_source(cfg: ExperimentConfig) -> BernoulliInstance | FeedbackMatrices:
    if cfg.is_synthetic:
        if cfg.horizon is None:
            raise ValueError("synthetic experiments need a horizon")
        return cfg.instance
    if cfg.bundled is not None:
        poses, bw = bundled_trace(cfg.bundled)
    else:
        poses, bw = read_pose_csv(cfg.poses), read_bandwidth_csv(cfg.bandwidth)
    horizon = cfg.horizon or 30_000
    return build_matrices(poses, bw, cfg.portions, horizon, cfg.interval_s)


def _default_window(horizon: int) -> tuple[int, int]:
    return (max(1, horizon // 20), horizon) if horizon >= 2 else (1, 1)


@dataclass
class PolicyOutcome:
    spec: PolicySpec
    summary: MetricsSummary
    slope: float
    window: tuple[int, int]


def run_experiment(cfg: ExperimentConfig) -> dict[str, PolicyOutcome]:
    """Run every configured policy on shared replication seeds.

    The oracle is run alongside on the same seeds to provide the baseline
    for relative degradation.
    """
    source = build_source(cfg)
    horizon = cfg.horizon if cfg.is_synthetic else source.t_count
    window = cfg.slope_window or _default_window(horizon)
    kwargs = dict(correlated=cfg.correlated)
    if cfg.is_synthetic:
        oracle = run_replications(source, "oracle", None, horizon, cfg.replications, cfg.base_seed, **kwargs)
    else:
        oracle = run_replication(source, "oracle", None, horizon, cfg.base_seed)
    outcomes = {}
    for spec in cfg.policies:
        log.info("running %s under %s for %d x %d slots", spec.name, spec.model.label,
                 cfg.replications, horizon)
        extra = {"policy_kwargs": {"gamma": cfg.exp3_gamma}} if spec.name == "exp3" else {}
        results = run_replications(source, spec.name, spec.model, horizon, cfg.replications,
                                   cfg.base_seed, **kwargs, **extra)
        summary = aggregate(results, oracle)
        slope = regret_slope(summary, window) if window[0] < window[1] else math.nan
        outcomes[spec.name] = PolicyOutcome(spec, summary, slope, window)
    return outcomes


def write_outputs(cfg: ExperimentConfig, outcomes: dict[str, PolicyOutcome], out_dir: str | Path,
                  *, svg: bool = False) -> Path:
    """One ``<policy>.csv`` curve per policy, plus ``summary.csv`` and ``metadata.json``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, oc in outcomes.items():
        s = oc.summary
        with open(out_dir / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "mean_regret", "stderr", "mean_failed"])
            for t in range(s.horizon):
                w.writerow([t + 1, f"{s.mean_regret[t]:.6g}", f"{s.stderr_regret[t]:.6g}",
                            f"{s.mean_failed[t]:.6g}"])
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["policy", "feedback", "replications", "horizon", "final_mean_regret",
                    "final_stderr", "final_mean_failed", "relative_degradation",
                    "degradation_excluded", "slope", "slope_t1", "slope_t2"])
        for name, oc in outcomes.items():
            s = oc.summary
            w.writerow([name, oc.spec.model.label, s.replications, s.horizon,
                        f"{s.mean_regret[-1]:.6g}", f"{s.stderr_regret[-1]:.6g}",
                        f"{s.mean_failed[-1]:.6g}", f"{s.relative_degradation:.6g}",
                        s.degradation_excluded, f"{oc.slope:.6g}", *oc.window])
    meta = {
        "replications": cfg.replications,
        "base_seed": cfg.base_seed,
        "horizon": next(iter(outcomes.values())).summary.horizon if outcomes else cfg.horizon,
        "source": "synthetic" if cfg.is_synthetic else "trace",
        "instance": cfg.instance.to_dict() if cfg.instance else None,
        "correlated": cfg.correlated,
        "policies": [{"name": oc.spec.name, "feedback": oc.spec.model.label} for oc in outcomes.values()],
    }
    with open(out_dir / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    if svg:
        plot_curves(outcomes, out_dir / "regret.svg")
    return out_dir


def plot_curves(outcomes: dict[str, PolicyOutcome], path: str | Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for name, oc in outcomes.items():
        s = oc.summary
        t = np.arange(1, s.horizon + 1)
        ax.plot(t, s.mean_regret, label=f"{name} ({oc.spec.model.label})")
        ax.fill_between(t, s.mean_regret - s.stderr_regret, s.mean_regret + s.stderr_regret, alpha=0.2)
    ax.set_xlabel("timeslot")
    ax.set_ylabel("cumulative regret")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def summary_rows(outcomes: dict[str, PolicyOutcome]) -> Sequence[str]:
    lines = []
    for name, oc in outcomes.items():
        s = oc.summary
        lines.append(f"{name:<10} {oc.spec.model.label:<6} regret={s.mean_regret[-1]:10.3f} "
                     f"+/- {s.stderr_regret[-1]:.3f}  degradation={s.relative_degradation:.4f}  "
                     f"slope={oc.slope:.3f}")
    return lines
