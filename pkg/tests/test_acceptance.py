"""The ten acceptance criteria, each printing one PASS/FAIL line."""

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lgmd import io
from lgmd.arena import ArenaWorld, Outcome, SimConfig, check_trajectory, run_episode
from lgmd.cli import main
from lgmd.core import Params
from lgmd.decision import Task, TaskState, scheduler_step
from lgmd.pipeline import (
    GROUPING_KERNEL, INHIBITION_KERNEL, ce_layer, i_layer, normalize, run_sequence,
)
from lgmd.stimulus import Kind, default_spec, generate
from oracles import naive_correlate, printed_inhibition_kernel

P = Params()


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_01_convolution_oracles(report):
    naive_correlate(np.zeros((8, 8)), INHIBITION_KERNEL)  # compile before timing
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(100):
        x = rng.uniform(-255.0, 255.0, size=(72, 99))
        mismatches += not np.array_equal(i_layer(x), naive_correlate(x, INHIBITION_KERNEL))
        mismatches += not np.array_equal(ce_layer(x), naive_correlate(x, GROUPING_KERNEL))
    elapsed = time.perf_counter() - t0
    report(1, "convolution oracles", mismatches == 0 and elapsed < 5.0,
           f"{mismatches} mismatches over 200 comparisons in {elapsed:.2f} s")


def test_02_kernel_entries(report):
    err = float(np.max(np.abs(INHIBITION_KERNEL - printed_inhibition_kernel())))
    report(2, "inhibition kernel", INHIBITION_KERNEL.shape == (5, 5) and err <= 1e-12,
           f"max deviation {err:.1e}")


def test_03_looming_selectivity(report):
    loom = run_sequence(generate(default_spec(Kind.LOOMING)), P)
    contact = len(loom) - 1
    first = next((i for i, r in enumerate(loom) if r.c_lgmd), None)
    trans = run_sequence(generate(default_spec(Kind.TRANSLATE)), P)
    fired = sum(r.c_lgmd for r in trans)
    ok = first is not None and contact - first >= P.n_sp and fired == 0
    report(3, "looming selectivity", ok,
           f"looming confirmed at frame {first}, contact frame {contact}; translate confirmations {fired}")


def test_04_grating_suppression(report):
    spec = default_spec(Kind.GRATING)
    res = run_sequence(generate(spec), P)
    quiet = all(r.kappa < P.T_s for r in res)
    after = res[spec.onset + 1:]
    frac = sum(r.ffi >= P.T_FFI for r in after) / len(after)
    report(4, "grating suppression", quiet and frac >= 0.8,
           f"max kappa {max(r.kappa for r in res):.2f}, F >= T_FFI on {frac:.0%} of moving frames")


def test_05_saccade_gating(report):
    spec = default_spec(Kind.ROTATE)
    res = run_sequence(generate(spec), P)
    pan_start = spec.onset + 1           # first frame that differs from its predecessor
    first_ffi = next((i for i, r in enumerate(res) if r.c_ffi), None)
    ts = TaskState(forward_cmd=0.5)
    tasks = []
    for r in res:
        ts, _ = scheduler_step(ts, r.c_lgmd, r.c_ffi)
        tasks.append(ts.task)
    ok = (first_ffi is not None and first_ffi - pan_start <= 2
          and Task.SLOWDOWN in tasks and Task.AVOID not in tasks)
    report(5, "saccade gating", ok,
           f"pan starts at frame {pan_start}, first c_ffi at {first_ffi}, "
           f"slowdown frames {tasks.count(Task.SLOWDOWN)}, avoid frames {tasks.count(Task.AVOID)}")


def test_06_closed_loop_avoidance(report):
    world = ArenaWorld()
    good = 0
    details = []
    for seed in range(20):
        rep = check_trajectory(run_episode(world, P, SimConfig(seed=seed)), world)
        ok = rep.outcome is Outcome.REACHED and rep.intersections == 0
        good += ok
        if not ok:
            details.append(f"seed {seed}: {rep.outcome.value}, {rep.intersections} intersections")
    control = run_episode(world, P, SimConfig(detect=False)).outcome
    ok = good == 20 and control is Outcome.COLLIDED
    report(6, "closed-loop avoidance", ok,
           f"{good}/20 reached cleanly; no-detect control {control.value}" + "".join("; " + d for d in details))


def test_07_scheduler_priority(report):
    failures = []

    @settings(max_examples=300, database=None)
    @given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=1, max_size=400))
    def check(stream):
        ts = TaskState(forward_cmd=0.5)
        prev = False
        onsets = edges = 0
        for c_lgmd, c_ffi in stream:
            before = ts
            ts, _ = scheduler_step(ts, c_lgmd, c_ffi)
            started = ts.task is Task.AVOID and before.task is not Task.AVOID
            assert not (started and c_ffi)
            edges += c_lgmd and not prev and before.task is not Task.AVOID and not c_ffi
            onsets += started
            prev = c_lgmd
        assert onsets == edges

    try:
        check()
    except AssertionError as exc:
        failures.append(str(exc).splitlines()[0] if str(exc) else "assertion failed")
    report(7, "scheduler priority", not failures,
           "300 random streams; " + (failures[0] if failures else "no avoid on c_ffi frames, one maneuver per edge"))


def test_08_determinism(report, tmp_path):
    stim = tmp_path / "frames"
    main(["stim", "--kind", "looming", "--out", str(stim)])
    for name in ("a.csv", "b.csv"):
        main(["detect", "--input", str(stim), "--trace", str(tmp_path / name)])
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    report(8, "determinism", a == b and len(a) > 0, f"trace files of {len(a)} and {len(b)} bytes")


def test_09_throughput(report, capsys):
    main(["bench", "--frames", "3000"])
    out = capsys.readouterr().out
    fps = float(dict(l.split(": ", 1) for l in out.splitlines())["frames_per_second"])
    report(9, "throughput floor", fps >= 300.0, f"{fps:.0f} frames/s at 99x72")


def test_10_literal_normalization(report):
    value = normalize(0.0, Params(norm_mode="literal"))
    report(10, "literal normalization", abs(value - (-1.7536e-6)) <= 1e-10, f"kappa(K=0) = {value:.6e}")
