"""Regenerate the packaged synthetic traces in src/adaport/data/."""

from pathlib import Path

from adaport.traces import synthesize_bandwidth_trace, synthesize_pose_trace, write_bandwidth_csv, write_pose_csv

POSE_SEED = 2024
SLOTS = 3000

out = Path(__file__).resolve().parents[1] / "src" / "adaport" / "data"
out.mkdir(parents=True, exist_ok=True)
write_pose_csv(synthesize_pose_trace(SLOTS, seed=POSE_SEED), out / "poses.csv")
for rate in (100, 150):
    write_bandwidth_csv(synthesize_bandwidth_trace(SLOTS, rate, seed=rate), out / f"bandwidth_{rate}.csv")
print(f"wrote traces to {out}")
