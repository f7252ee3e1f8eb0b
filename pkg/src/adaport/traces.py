"""Head-motion and bandwidth traces to feedback matrices.

Pipeline per timeslot: predict the head pose from the previous three
samples by least squares, test each candidate portion (centred on the
prediction) for containment of the 100x90 degree viewport centred on the
actual pose, and test each portion's payload against the slot's measured
throughput.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .environments import FeedbackMatrices

__all__ = [
    "VIEWPORT",
    "PORTION_EXTENTS",
    "DEFAULT_INTERVAL_S",
    "Pose",
    "PortionSpec",
    "InsufficientHistory",
    "wrap_yaw",
    "yaw_error",
    "predict_pose",
    "coverage",
    "delivery",
    "default_portions",
    "build_matrices",
    "read_pose_csv",
    "read_bandwidth_csv",
    "write_pose_csv",
    "write_bandwidth_csv",
    "write_matrices_csv",
    "read_matrices_csv",
    "synthesize_pose_trace",
    "synthesize_bandwidth_trace",
    "bundled_trace",
]

VIEWPORT = (100.0, 90.0)
PORTION_EXTENTS = ((100.0, 90.0), (102.0, 91.0), (108.0, 94.0), (120.0, 100.0))
DEFAULT_INTERVAL_S = 0.01
DEFAULT_BASE_MEGABITS = 0.9


class Pose(NamedTuple):
    yaw: float
    pitch: float


class InsufficientHistory(ValueError):
    """Fewer than three samples are available for the pose regression."""


@dataclass(frozen=True)
class PortionSpec:
    yaw_extent: float
    pitch_extent: float
    size_megabits: float

    def __post_init__(self) -> None:
        if self.yaw_extent < VIEWPORT[0] or self.pitch_extent < VIEWPORT[1]:
            raise ValueError(
                f"portion {self.yaw_extent}x{self.pitch_extent} cannot contain the "
                f"{VIEWPORT[0]:g}x{VIEWPORT[1]:g} viewport")
        if not self.size_megabits > 0:
            raise ValueError("portion size must be positive")

    @property
    def yaw_slack(self) -> float:
        return (self.yaw_extent - VIEWPORT[0]) / 2.0

    @property
    def pitch_slack(self) -> float:
        return (self.pitch_extent - VIEWPORT[1]) / 2.0


def default_portions(base_megabits: float = DEFAULT_BASE_MEGABITS) -> list[PortionSpec]:
    """The four nested portions, payload scaled by angular area over the minimum viewport."""
    min_area = VIEWPORT[0] * VIEWPORT[1]
    return [PortionSpec(w, h, base_megabits * w * h / min_area) for w, h in PORTION_EXTENTS]


def _check_ordered(portions: Sequence[PortionSpec]) -> None:
    for a, b in zip(portions, portions[1:]):
        if b.yaw_extent < a.yaw_extent or b.pitch_extent < a.pitch_extent:
            raise ValueError("portions must be ordered by nondecreasing extent")


def wrap_yaw(yaw):
    """Map degrees into [-180, 180)."""
    return (np.asarray(yaw, dtype=float) + 180.0) % 360.0 - 180.0


def yaw_error(actual: float, predicted: float) -> float:
    """Signed minimal angular difference actual - predicted, in [-180, 180)."""
    return float(wrap_yaw(actual - predicted))


def predict_pose(history: Sequence[Pose]) -> Pose:
    """Extrapolate the next pose from exactly three consecutive samples.

    Yaw is unwrapped first so consecutive steps are at most 180 degrees,
    then each axis gets an ordinary least-squares line evaluated one slot
    ahead. Pitch is clamped to [-90, 90].
    """
    if len(history) < 3:
        raise InsufficientHistory(f"need 3 samples, got {len(history)}")
    if len(history) > 3:
        raise ValueError(f"expected exactly 3 samples, got {len(history)}")
    yaw = np.unwrap(np.array([p.yaw for p in history]), period=360.0)
    pitch = np.array([p.pitch for p in history], dtype=float)
    # OLS on t = 0, 1, 2 evaluated at t = 3: mean + slope * 2
    slope_yaw = (yaw[2] - yaw[0]) / 2.0
    slope_pitch = (pitch[2] - pitch[0]) / 2.0
    next_yaw = yaw.mean() + 2.0 * slope_yaw
    next_pitch = pitch.mean() + 2.0 * slope_pitch
    return Pose(float(wrap_yaw(next_yaw)), float(np.clip(next_pitch, -90.0, 90.0)))


def coverage(actual: Pose, predicted: Pose, portion: PortionSpec) -> int:
    """1 if the portion centred on ``predicted`` contains the viewport centred on ``actual``."""
    dyaw = abs(yaw_error(actual.yaw, predicted.yaw))
    dpitch = abs(actual.pitch - predicted.pitch)
    return int(dyaw <= portion.yaw_slack and dpitch <= portion.pitch_slack)


def delivery(portion: PortionSpec, throughput_mbps: float, interval_s: float = DEFAULT_INTERVAL_S) -> int:
    """1 if the portion's transmission delay fits within one frame interval."""
    if throughput_mbps < 0:
        raise ValueError("throughput must be nonnegative")
    if interval_s <= 0:
        raise ValueError("interval must be positive")
    if throughput_mbps == 0:
        return 0
    return int(portion.size_megabits / throughput_mbps <= interval_s)


def build_matrices(
    poses: Sequence[Pose],
    bandwidth: Sequence[float],
    portions: Sequence[PortionSpec],
    target_T: int,
    interval_s: float = DEFAULT_INTERVAL_S,
) -> FeedbackMatrices:
    """Replay the traces (each cycled on its own) for ``target_T`` slots.

    Until three poses have been seen the prediction falls back to the last
    observed pose, and to the actual pose in the very first slot.
    """
    if not len(poses) or not len(bandwidth):
        raise ValueError("pose and bandwidth traces must be nonempty")
    if target_T < 1:
        raise ValueError("target_T must be positive")
    _check_ordered(portions)
    n_pose, n_bw = len(poses), len(bandwidth)
    x = np.zeros((target_T, len(portions)), dtype=np.uint8)
    y = np.zeros((target_T, len(portions)), dtype=np.uint8)
    history: list[Pose] = []
    for t in range(target_T):
        actual = Pose(*poses[t % n_pose])
        if len(history) >= 3:
            predicted = predict_pose(history[-3:])
        elif history:
            predicted = history[-1]
        else:
            predicted = actual
        bw = float(bandwidth[t % n_bw])
        for i, portion in enumerate(portions):
            x[t, i] = coverage(actual, predicted, portion)
            y[t, i] = delivery(portion, bw, interval_s)
        history.append(actual)
        if len(history) > 3:
            history.pop(0)
    return FeedbackMatrices(x, y)


def _read_csv(path: str | Path, columns: Sequence[str]) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in columns):
            raise ValueError(f"{path}: header must contain {', '.join(columns)}")
        rows = [[float(r[c]) for c in columns] for r in reader]
    arr = np.array(rows, dtype=float).reshape(-1, len(columns))
    if len(arr) and np.any(np.diff(arr[:, 0]) <= 0):
        raise ValueError(f"{path}: timeslot column must be strictly increasing")
    return arr


def read_pose_csv(path: str | Path) -> list[Pose]:
    """Read ``t,yaw_deg,pitch_deg``; angles normalised into canonical ranges."""
    arr = _read_csv(path, ("t", "yaw_deg", "pitch_deg"))
    return [Pose(float(wrap_yaw(yaw)), float(np.clip(pitch, -90.0, 90.0)))
            for _, yaw, pitch in arr]


def read_bandwidth_csv(path: str | Path) -> np.ndarray:
    """Read ``t,throughput_mbps`` into a throughput vector."""
    arr = _read_csv(path, ("t", "throughput_mbps"))
    if np.any(arr[:, 1] < 0):
        raise ValueError(f"{path}: negative throughput")
    return arr[:, 1].copy()


def write_pose_csv(poses: Sequence[Pose], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "yaw_deg", "pitch_deg"])
        for t, p in enumerate(poses):
            w.writerow([t, f"{p.yaw:.4f}", f"{p.pitch:.4f}"])


def write_bandwidth_csv(throughput: Sequence[float], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "throughput_mbps"])
        for t, v in enumerate(throughput):
            w.writerow([t, f"{v:.3f}"])


def write_matrices_csv(m: FeedbackMatrices, path: str | Path) -> None:
    """Columns ``t, x_1..x_N, y_1..y_N`` with 1-based portion labels."""
    n = m.n_arms
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"x_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(n)])
        for t in range(m.t_count):
            w.writerow([t + 1, *m.x[t].tolist(), *m.y[t].tolist()])


def read_matrices_csv(path: str | Path) -> FeedbackMatrices:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n = (len(header) - 1) // 2
        if header != ["t"] + [f"x_{i + 1}" for i in range(n)] + [f"y_{i + 1}" for i in range(n)]:
            raise ValueError(f"{path}: unexpected header {header}")
        data = np.array([[int(v) for v in row] for row in reader], dtype=np.int64).reshape(-1, 2 * n + 1)
    return FeedbackMatrices(data[:, 1:n + 1], data[:, n + 1:])


def synthesize_pose_trace(n: int, seed: int = 0) -> list[Pose]:
    """Head motion alternating fixations, smooth pursuits and fast turns.

    Fixations hold the pose exactly. Pursuits move at a constant angular
    velocity (0.2 to 1.5 deg/slot) with small tremor noise. Fast turns
    follow a bell-shaped speed profile peaking at 2 to 6 deg/slot. Segment
    lengths are geometric with means 40, 30 and 8 slots.
    """
    rng = np.random.default_rng(seed)
    yaw, pitch = 0.0, 0.0
    out: list[Pose] = []
    while len(out) < n:
        kind = rng.choice(3, p=[0.45, 0.4, 0.15])
        length = int(rng.geometric(1.0 / (40, 30, 8)[kind]))
        heading = rng.uniform(0.0, 2.0 * np.pi)
        direction = np.array([np.cos(heading), 0.4 * np.sin(heading)])
        if kind == 1:
            speed = np.full(length, rng.uniform(0.2, 1.5))
        elif kind == 2:
            peak = rng.uniform(2.0, 6.0)
            speed = peak * np.sin(np.pi * (np.arange(length) + 0.5) / length)
        for k in range(length):
            if kind != 0:
                step = speed[k] * direction + rng.normal(0.0, 0.3, size=2)
                yaw = float(wrap_yaw(yaw + step[0]))
                pitch = pitch + step[1]
                if abs(pitch) > 60.0:
                    pitch = float(np.sign(pitch) * 120.0 - pitch)
                    direction[1] = -direction[1]
            out.append(Pose(yaw, pitch))
    return out[:n]


def synthesize_bandwidth_trace(n: int, rate_mbps: float, seed: int = 0, *, jitter: float = 0.02,
                               dip_prob: float = 0.005) -> np.ndarray:
    """Measured throughput for a fixed sending rate.

    An AR(1) multiplicative deviation models short-term variability (the
    measurement never exceeds the sending rate), and occasional fades of
    2 to 8 slots cut throughput to 40-80 percent.
    """
    rng = np.random.default_rng(seed)
    out = np.empty(n)
    level = 0.0
    dip = 0
    for t in range(n):
        level = 0.9 * level + rng.normal(0.0, jitter)
        if dip == 0 and rng.random() < dip_prob:
            dip = int(rng.integers(2, 9))
        factor = rng.uniform(0.4, 0.8) if dip > 0 else 1.0
        dip = max(dip - 1, 0)
        out[t] = max(0.0, rate_mbps * min(1.0, 0.985 + level) * factor)
    return out


def bundled_trace(rate: str = "150") -> tuple[list[Pose], np.ndarray]:
    """The packaged synthetic pose trace and a bandwidth trace ("100" or "150" Mbps)."""
    if rate not in ("100", "150"):
        raise ValueError("bundled bandwidth traces exist for 100 and 150 Mbps")
    data = resources.files("adaport") / "data"
    with resources.as_file(data / "poses.csv") as p:
        poses = read_pose_csv(p)
    with resources.as_file(data / f"bandwidth_{rate}.csv") as p:
        bw = read_bandwidth_csv(p)
    return poses, bw
