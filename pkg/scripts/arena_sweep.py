"""Fly seeded arena episodes and summarise detection distance, clearance and outcome.

Usage: python scripts/arena_sweep.py [--episodes 20] [--side right|left|away] [--out results/arena]
"""

import argparse
from dataclasses import replace
from pathlib import Path

from lgmd import io
from lgmd.arena import ArenaWorld, SimConfig, check_trajectory, run_episode
from lgmd.core import Params
from lgmd.decision import SchedulerConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--episodes", type=int, default=20)
    ap.add_argument("--side", default="right", choices=("right", "left", "away"))
    ap.add_argument("--depth", type=float, default=ArenaWorld().depth, help="room size across the route (m)")
    ap.add_argument("--out", default="results/arena")
    args = ap.parse_args()

    base = ArenaWorld()
    mid = args.depth / 2
    world = replace(base, depth=args.depth, obstacle=replace(base.obstacle, cy=mid),
                    start=(base.start[0], mid), destination=(base.destination[0], mid))
    params = Params()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'seed':>4} {'start y':>8} {'outcome':>9} {'detect x':>9} {'clearance':>10} {'avoids':>7}")
    for seed in range(args.episodes):
        sim = SimConfig(seed=seed, scheduler=SchedulerConfig(shift_side=args.side))
        trace = run_episode(world, params, sim)
        rep = check_trajectory(trace, world)
        io.write_trace(io.rows_from_episode(trace), out / f"episode_seed{seed}.csv")
        det_x = "-" if rep.detection_frame is None else f"{trace.records[rep.detection_frame].pose.x:.2f}"
        print(f"{seed:>4} {trace.records[0].pose.y:>8.3f} {rep.outcome.value:>9} {det_x:>9} "
              f"{rep.min_clearance:>10.3f} {rep.avoid_maneuvers:>7}")
    control = run_episode(world, params, SimConfig(detect=False))
    print(f"no-detect control: {control.outcome.value}")


if __name__ == "__main__":
    main()
