"""Spike generation, collision confirmation, FFI gating and the task scheduler."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Sequence, Tuple


def spike(kappa: float, T_s: float) -> bool:
    return bool(kappa >= T_s)


def push_spike(window: Tuple[bool, ...], value: bool, capacity: int) -> Tuple[bool, ...]:
    """Append ``value`` to the window, evicting the oldest entries past capacity."""
    out = tuple(window) + (bool(value),)
    return out[-capacity:] if capacity > 0 else ()


def collision_confirm(window: Sequence[bool], n_sp: int) -> bool:
    if len(window) < n_sp:
        return False
    return all(window[len(window) - n_sp:])


def ffi_trigger(F_f: float, T_FFI: float) -> bool:
    return bool(F_f >= T_FFI)


class Task(str, enum.Enum):
    CRUISE = "cruise"
    AVOID = "avoid"
    SLOWDOWN = "slowdown"


class Target(str, enum.Enum):
    START = "start"
    DESTINATION = "destination"


@dataclass(frozen=True)
class SchedulerConfig:
    cruise_speed: float = 0.5       # m/s
    shift_distance: float = 1.0     # m, lateral avoid displacement
    shift_side: str = "right"       # "right", "left", or "away" from the excitation
    brake_time: float = 0.9         # s of zero forward command before shifting
    slowdown_factor: float = 0.5    # per-frame forward speed multiplier under FFI
    settle_time: float = 0.0        # s of hover after the shift before cruise resumes
    dt: float = 1.0 / 30.0


@dataclass(frozen=True)
class MotionCommand:
    forward: float = 0.0   # m/s along heading
    lateral: float = 0.0   # m/s, positive to the left of heading


@dataclass(frozen=True)
class TaskState:
    task: Task = Task.CRUISE
    avoid_progress: float = 0.0
    cruise_target: Target = Target.DESTINATION
    brake_remaining: float = 0.0
    settle_remaining: float = 0.0
    shift_dir: int = 0              # -1 right of heading, +1 left; set when an avoid starts
    forward_cmd: float = 0.0
    last_c_lgmd: bool = False

    def __post_init__(self):
        if self.task is not Task.AVOID and self.avoid_progress != 0.0:
            raise ValueError("avoid_progress must be zero outside the avoid task")
        if not 0.0 <= self.avoid_progress <= 1.0:
            raise ValueError("avoid_progress must lie in [0, 1]")


def shift_direction(side: str, balance: float) -> int:
    """Lateral sign for a new avoid: -1 is right of heading, +1 is left."""
    if side == "right":
        return -1
    if side == "left":
        return 1
    if side == "away":
        # excitation on the right half of the image means the threat is on the right
        return 1 if balance > 0 else -1
    raise ValueError(f"unknown shift side {side!r}")


def _cruise_velocity(target: Target, cfg: SchedulerConfig) -> float:
    return cfg.cruise_speed if target is Target.DESTINATION else -cfg.cruise_speed


def scheduler_step(
    ts: TaskState,
    c_lgmd: bool,
    c_ffi: bool,
    cfg: SchedulerConfig = SchedulerConfig(),
    reached: bool = False,
    balance: float = 0.0,
) -> Tuple[TaskState, MotionCommand]:
    """Advance the cruise/avoid/slowdown machine by one frame.

    FFI outranks LGMD outside an avoid maneuver. An avoid starts only on a
    rising edge of ``c_lgmd`` and ignores further excitation until the
    lateral shift completes. ``reached`` signals arrival at the current
    cruise target; an avoid triggered on the same frame wins. ``balance`` is
    the right-minus-left excitation share used by the "away" side policy.
    """
    rising = bool(c_lgmd) and not ts.last_c_lgmd
    last = bool(c_lgmd)

    if ts.task is Task.AVOID:
        if ts.brake_remaining > 0.0:
            brake = max(0.0, ts.brake_remaining - cfg.dt)
            nxt = replace(ts, brake_remaining=brake, forward_cmd=0.0, last_c_lgmd=last)
            return nxt, MotionCommand(0.0, 0.0)
        if ts.avoid_progress >= 1.0:
            if ts.settle_remaining > 0.0:
                settle = max(0.0, ts.settle_remaining - cfg.dt)
                return replace(ts, settle_remaining=settle, last_c_lgmd=last), MotionCommand(0.0, 0.0)
            return _cruise(ts, cfg, reached, last)
        shift_speed = cfg.cruise_speed
        step = shift_speed * cfg.dt / cfg.shift_distance
        progress = min(1.0, ts.avoid_progress + step)
        # the last partial step is scaled so the commanded integral is exact
        lateral = ts.shift_dir * shift_speed * (progress - ts.avoid_progress) / step
        nxt = replace(ts, avoid_progress=progress, forward_cmd=0.0, last_c_lgmd=last)
        return nxt, MotionCommand(0.0, lateral)

    if c_ffi:
        fwd = ts.forward_cmd * cfg.slowdown_factor
        nxt = replace(ts, task=Task.SLOWDOWN, forward_cmd=fwd, last_c_lgmd=last)
        return nxt, MotionCommand(fwd, 0.0)

    if rising:
        nxt = TaskState(
            task=Task.AVOID,
            avoid_progress=0.0,
            cruise_target=ts.cruise_target,
            brake_remaining=cfg.brake_time,
            settle_remaining=cfg.settle_time,
            shift_dir=shift_direction(cfg.shift_side, balance),
            forward_cmd=0.0,
            last_c_lgmd=last,
        )
        return nxt, MotionCommand(0.0, 0.0)

    return _cruise(ts, cfg, reached, last)


def _cruise(ts: TaskState, cfg: SchedulerConfig, reached: bool, last: bool):
    target = ts.cruise_target
    if reached:
        target = Target.START if target is Target.DESTINATION else Target.DESTINATION
    fwd = _cruise_velocity(target, cfg)
    nxt = TaskState(task=Task.CRUISE, cruise_target=target, forward_cmd=fwd, last_c_lgmd=last)
    return nxt, MotionCommand(fwd, 0.0)
