"""Command-line entry point: ``lgmd detect | stim | sim | bench``.

Exit codes
    0  success (``sim``: every episode reached the destination)
    1  usage, configuration or input error
    2  ``detect``: a collision was confirmed somewhere in the sequence
    3  ``sim``: an episode collided
    4  ``sim``: an episode timed out or left the arena
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from . import io
from .arena import Outcome, check_trajectory, render_view, run_episode
from .core import LayerState
from .pipeline import pipeline_step, run_sequence
from .stimulus import Kind, StimulusError, default_spec, generate, validate_spec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COLLISION = 2
EXIT_COLLIDED = 3
EXIT_INCOMPLETE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would collide with the detect protocol
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _config(paths) -> io.Config:
    return io.load_config(*[p for p in paths if p])


# -- detect ------------------------------------------------------------------

def cmd_detect(args) -> int:
    cfg = _config([args.config])
    frames = io.read_frames(args.input, args.format, cfg.width, cfg.height)
    if not frames:
        raise UsageError(f"no {args.format} frames found in {args.input}")
    results = run_sequence(frames, cfg.params)
    if args.trace:
        io.write_trace(io.rows_from_results(results), args.trace)
    first_lgmd = next((i for i, r in enumerate(results) if r.c_lgmd), None)
    first_ffi = next((i for i, r in enumerate(results) if r.c_ffi), None)
    print(f"frames: {len(results)}")
    print(f"spikes: {sum(r.spike for r in results)}")
    print(f"first_c_lgmd: {'none' if first_lgmd is None else first_lgmd}")
    print(f"first_c_ffi: {'none' if first_ffi is None else first_ffi}")
    return EXIT_COLLISION if first_lgmd is not None else EXIT_OK


# -- stim --------------------------------------------------------------------

_STIM_OPTIONS = [
    ("object_luminance", int), ("background_luminance", int), ("start_size", float),
    ("end_size", float), ("size", float), ("speed", float), ("period", int), ("drift", int),
    ("pan", int), ("texture", int), ("onset", int), ("seed", int),
]


def cmd_stim(args) -> int:
    cfg = _config([args.config])
    overrides = dict(cfg.stim)
    overrides.update(width=cfg.width, height=cfg.height)
    if args.frames is not None:
        overrides["frames"] = args.frames
    for name, _ in _STIM_OPTIONS:
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    spec = default_spec(args.kind, **overrides)
    errs = validate_spec(spec)
    if errs:
        raise UsageError("invalid stimulus: " + "; ".join(errs))
    frames = generate(spec)
    out = Path(args.out)
    try:
        io.write_frames(frames, out)
        (out / "manifest.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write to {out}: {exc.strerror or exc}") from None
    print(f"wrote {len(frames)} frames to {out}")
    return EXIT_OK


# -- sim ---------------------------------------------------------------------

def _keyed(path: str, seed, batch: bool) -> Path:
    p = Path(path)
    if not batch:
        return p
    return p.with_name(f"{p.stem}_seed{seed}{p.suffix}")


def _exit_for(outcome: Outcome) -> int:
    if outcome is Outcome.REACHED:
        return EXIT_OK
    if outcome is Outcome.COLLIDED:
        return EXIT_COLLIDED
    return EXIT_INCOMPLETE


def cmd_sim(args) -> int:
    cfg = _config([args.arena, args.config])
    world = cfg.world
    batch = args.episodes > 1
    if args.seed is not None:
        first = args.seed
    elif batch:
        first = 0
    else:
        first = cfg.sim.seed
    seeds = [first] if not batch else [first + i for i in range(args.episodes)]
    codes = []
    for seed in seeds:
        sim = replace(cfg.sim, seed=seed, detect=cfg.sim.detect and not args.no_detect)
        trace = run_episode(world, cfg.params, sim)
        report = check_trajectory(trace, world, sim.fps)
        if batch:
            print(f"seed: {seed}")
        for line in report.lines():
            print(line)
        if args.trace:
            io.write_trace(io.rows_from_episode(trace), _keyed(args.trace, seed, batch))
        if args.frames_out:
            out = _keyed(args.frames_out, seed, batch)
            frames = [render_view(rec.pose, world, sim.width, sim.height, sim.fov_deg) for rec in trace.records]
            io.write_frames(frames, out)
        codes.append(_exit_for(report.outcome))
    return max(codes)


# -- bench -------------------------------------------------------------------

def cmd_bench(args) -> int:
    cfg = _config([args.config])
    looming = generate(default_spec(Kind.LOOMING, width=cfg.width, height=cfg.height))
    rotate = generate(default_spec(Kind.ROTATE, width=cfg.width, height=cfg.height))
    pool = looming + rotate
    frames = [pool[i % len(pool)] for i in range(args.frames)]
    state = LayerState.initial(cfg.params, cfg.width, cfg.height)
    spikes = 0
    t0 = time.perf_counter()
    for frame in frames:
        res, state = pipeline_step(state, frame, cfg.params)
        spikes += res.spike
    elapsed = time.perf_counter() - t0
    fps = args.frames / elapsed if elapsed > 0 else float("inf")
    print(f"frames: {args.frames}")
    print(f"resolution: {cfg.width}x{cfg.height}")
    print(f"spikes: {spikes}")
    print(f"frames_per_second: {fps:.1f}")
    print(f"us_per_frame: {1e6 * elapsed / args.frames:.1f}")
    return EXIT_OK


# -- wiring ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lgmd", description="LGMD looming detector toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("detect", help="run the detector over a frame sequence")
    d.add_argument("--input", required=True, help="directory of frames or a single frame file")
    d.add_argument("--format", choices=("pgm", "y8"), default="pgm")
    d.add_argument("--config", help="key = value parameter file")
    d.add_argument("--trace", help="write the per-frame trace CSV here")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("stim", help="write a synthetic stimulus as numbered PGM files")
    s.add_argument("--kind", required=True, choices=[k.value for k in Kind])
    s.add_argument("--frames", type=_positive_int)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--config")
    for name, typ in _STIM_OPTIONS:
        s.add_argument("--" + name.replace("_", "-"), dest=name, type=typ)
    s.set_defaults(func=cmd_stim)

    m = sub.add_parser("sim", help="fly closed-loop episodes in the arena")
    m.add_argument("--arena", help="arena config file")
    m.add_argument("--config", help="parameter config file")
    m.add_argument("--seed", type=int, help="start-offset seed (first seed of a batch)")
    m.add_argument("--trace", help="episode trace CSV (suffixed _seedN in a batch)")
    m.add_argument("--frames-out", dest="frames_out", help="directory for rendered frames")
    m.add_argument("--episodes", type=_positive_int, default=1)
    m.add_argument("--no-detect", dest="no_detect", action="store_true",
                   help="feed no collision alerts to the scheduler (negative control)")
    m.set_defaults(func=cmd_sim)

    b = sub.add_parser("bench", help="measure pipeline throughput")
    b.add_argument("--frames", type=_positive_int, default=3000)
    b.add_argument("--config")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, io.ConfigError, io.FrameFormatError, StimulusError) as exc:
        print(f"lgmd {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lgmd {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
