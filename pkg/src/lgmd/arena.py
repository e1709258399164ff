"""Closed-loop 2-D arena: column-raycast camera, first-order vehicle, LGMD-driven scheduler."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from . import decision
from .core import FPS, FOV_DEG, FRAME_HEIGHT, FRAME_WIDTH, Frame, FrameResult, LayerState, Params
from .decision import MotionCommand, SchedulerConfig, Task, TaskState
from .pipeline import pipeline_step


class ArenaError(ValueError):
    pass


@dataclass(frozen=True)
class Box:
    """Axis-aligned obstacle footprint with a two-tone checker skin."""

    cx: float = 3.0
    cy: float = 3.0
    size_x: float = 0.5
    size_y: float = 0.5
    height: float = 1.0
    texture: float = 0.1
    dark: int = 10
    light: int = 245

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        return (self.cx - self.size_x / 2, self.cy - self.size_y / 2,
                self.cx + self.size_x / 2, self.cy + self.size_y / 2)

    def distance(self, x: float, y: float) -> float:
        """Euclidean distance from a point to the footprint (0 inside)."""
        x0, y0, x1, y1 = self.bounds
        dx = max(x0 - x, 0.0, x - x1)
        dy = max(y0 - y, 0.0, y - y1)
        return math.hypot(dx, dy)


@dataclass(frozen=True)
class ArenaWorld:
    width: float = 6.0                # room spans [0, width] x [0, depth]
    depth: float = 6.0
    obstacle: Optional[Box] = field(default_factory=Box)
    wall_texture: float = 0.5
    wall_dark: int = 110
    wall_light: int = 150
    start: Tuple[float, float] = (0.5, 3.0)
    destination: Tuple[float, float] = (5.5, 3.0)
    vehicle_radius: float = 0.17
    camera_height: float = 0.5

    @property
    def heading(self) -> float:
        (sx, sy), (dx, dy) = self.start, self.destination
        return math.atan2(dy - sy, dx - sx)

    def inside(self, x: float, y: float) -> bool:
        return 0.0 <= x <= self.width and 0.0 <= y <= self.depth


def validate_world(world: ArenaWorld) -> List[str]:
    errs = []
    if world.width <= 0 or world.depth <= 0:
        errs.append("arena dimensions must be positive")
    if world.vehicle_radius <= 0:
        errs.append("vehicle_radius must be positive")
    if world.start == world.destination:
        errs.append("start and destination coincide")
    for name in ("start", "destination"):
        if not world.inside(*getattr(world, name)):
            errs.append(f"{name} lies outside the arena")
    box = world.obstacle
    if box is not None:
        x0, y0, x1, y1 = box.bounds
        if not (0 < x0 and x1 < world.width and 0 < y0 and y1 < world.depth):
            errs.append("obstacle must lie strictly inside the arena")
        if min(box.size_x, box.size_y, box.height, box.texture) <= 0:
            errs.append("obstacle dimensions and texture must be positive")
        for name in ("start", "destination"):
            if box.distance(*getattr(world, name)) <= world.vehicle_radius:
                errs.append(f"{name} lies inside the inflated obstacle footprint")
    if world.wall_texture <= 0:
        errs.append("wall_texture must be positive")
    return errs


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float = 0.0
    forward_speed: float = 0.0
    lateral_speed: float = 0.0


@dataclass(frozen=True)
class SimConfig:
    fps: float = FPS
    tau: float = 0.3                  # s, velocity tracking time constant
    max_time: float = 60.0            # s of simulated time before timeout
    detect: bool = True               # False feeds c_lgmd = False to the scheduler
    start_offset_range: float = 0.5   # m, lateral start offset drawn from +-range
    seed: Optional[int] = None        # None: no start offset
    width: int = FRAME_WIDTH
    height: int = FRAME_HEIGHT
    fov_deg: float = FOV_DEG
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)

    @property
    def dt(self) -> float:
        return 1.0 / self.fps


class Outcome(str, enum.Enum):
    REACHED = "reached"
    COLLIDED = "collided"
    OUT_OF_BOUNDS = "out_of_bounds"
    TIMEOUT = "timeout"


@dataclass
class EpisodeRecord:
    frame: int
    pose: Pose
    result: FrameResult
    task: TaskState


@dataclass
class EpisodeTrace:
    records: List[EpisodeRecord] = field(default_factory=list)
    outcome: Optional[Outcome] = None
    final_pose: Optional[Pose] = None

    def set_outcome(self, outcome: Outcome):
        if self.outcome is not None:
            raise RuntimeError("outcome already set")
        self.outcome = outcome

    @property
    def avoid_count(self) -> int:
        prev = Task.CRUISE
        n = 0
        for rec in self.records:
            if rec.task.task is Task.AVOID and prev is not Task.AVOID:
                n += 1
            prev = rec.task.task
        return n


# -- rendering ---------------------------------------------------------------

def column_angles(w: int, fov_deg: float = FOV_DEG) -> np.ndarray:
    """Ray angle of each image column relative to the heading; left is positive."""
    pitch = math.radians(fov_deg) / w
    return (w / 2.0 - (np.arange(w) + 0.5)) * pitch


def _ray_box(ox, oy, dx, dy, bounds):
    """Slab test for rays leaving (ox, oy); returns entry distance, face axis and face coordinate."""
    x0, y0, x1, y1 = bounds
    with np.errstate(divide="ignore", invalid="ignore"):
        tx0, tx1 = (x0 - ox) / dx, (x1 - ox) / dx
        ty0, ty1 = (y0 - oy) / dy, (y1 - oy) / dy
    txn, txf = np.minimum(tx0, tx1), np.maximum(tx0, tx1)
    tyn, tyf = np.minimum(ty0, ty1), np.maximum(ty0, ty1)
    # rays parallel to a slab: inside it → unbounded, outside → miss
    par_x = dx == 0
    par_y = dy == 0
    txn = np.where(par_x, np.where((x0 <= ox) & (ox <= x1), -np.inf, np.inf), txn)
    txf = np.where(par_x, np.where((x0 <= ox) & (ox <= x1), np.inf, -np.inf), txf)
    tyn = np.where(par_y, np.where((y0 <= oy) & (oy <= y1), -np.inf, np.inf), tyn)
    tyf = np.where(par_y, np.where((y0 <= oy) & (oy <= y1), np.inf, -np.inf), tyf)
    t_near = np.maximum(txn, tyn)
    t_far = np.minimum(txf, tyf)
    hit = (t_near <= t_far) & (t_near > 0)
    x_face = txn >= tyn   # entered through an x = const face
    t_hit = np.where(hit, t_near, 0.0)
    u = np.where(x_face, oy + t_hit * dy, ox + t_hit * dx)
    return np.where(hit, t_near, np.inf), u


def _ray_walls(ox, oy, dx, dy, world: ArenaWorld):
    with np.errstate(divide="ignore", invalid="ignore"):
        tx = np.where(dx > 0, (world.width - ox) / dx, np.where(dx < 0, -ox / dx, np.inf))
        ty = np.where(dy > 0, (world.depth - oy) / dy, np.where(dy < 0, -oy / dy, np.inf))
    x_wall = tx <= ty
    t = np.minimum(tx, ty)
    u = np.where(x_wall, oy + t * dy, ox + t * dx)
    return t, u


def _checker(u: np.ndarray, z: np.ndarray, period: float, dark: int, light: int) -> np.ndarray:
    parity = (np.floor(u / period).astype(np.int64) + np.floor(z / period).astype(np.int64)) & 1
    return np.where(parity == 1, dark, light)


def render_view(pose: Pose, world: ArenaWorld, w: int = FRAME_WIDTH, h: int = FRAME_HEIGHT,
                fov_deg: float = FOV_DEG) -> Frame:
    """Render the forward camera image seen from ``pose``.

    Columns are equiangular rays in the flight plane; rows are equiangular in
    elevation with the same pitch. Each column shows the nearest surface; rows
    above or below the obstacle show the wall behind it.
    """
    if not world.inside(pose.x, pose.y):
        raise ArenaError(f"pose ({pose.x:.3f}, {pose.y:.3f}) is outside the arena")
    ang = pose.heading + column_angles(w, fov_deg)
    dx, dy = np.cos(ang), np.sin(ang)
    pitch = math.radians(fov_deg) / w
    elev = np.tan((h / 2.0 - (np.arange(h) + 0.5)) * pitch)[:, None]

    t_wall, u_wall = _ray_walls(pose.x, pose.y, dx, dy, world)
    z_wall = world.camera_height + elev * t_wall[None, :]
    img = _checker(u_wall[None, :], z_wall, world.wall_texture, world.wall_dark, world.wall_light)

    box = world.obstacle
    if box is not None:
        t_box, u_box = _ray_box(pose.x, pose.y, dx, dy, box.bounds)
        cols = t_box < t_wall
        if np.any(cols):
            tb = np.where(cols, t_box, 1.0)
            z_box = world.camera_height + elev * tb[None, :]
            on_box = cols[None, :] & (z_box >= 0.0) & (z_box <= box.height)
            skin = _checker(np.broadcast_to(u_box[None, :], z_box.shape), z_box,
                            box.texture, box.dark, box.light)
            img = np.where(on_box, skin, img)
    return Frame(img.astype(np.uint8))


def projected_width(pose: Pose, world: ArenaWorld, w: int = FRAME_WIDTH, h: int = FRAME_HEIGHT) -> int:
    """Number of image columns whose ray hits the obstacle first."""
    box = world.obstacle
    if box is None:
        return 0
    ang = pose.heading + column_angles(w)
    dx, dy = np.cos(ang), np.sin(ang)
    t_wall, _ = _ray_walls(pose.x, pose.y, dx, dy, world)
    t_box, _ = _ray_box(pose.x, pose.y, dx, dy, box.bounds)
    return int(np.count_nonzero(t_box < t_wall))


# -- dynamics ----------------------------------------------------------------

def dynamics_step(pose: Pose, cmd: MotionCommand, dt: float, tau: float = 0.3) -> Pose:
    """Exact first-order velocity tracking over one step of length ``dt``.

    Speeds relax toward the command with time constant ``tau``; position
    integrates the actual velocity analytically. Heading never changes.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    decay = math.exp(-dt / tau)
    fwd = cmd.forward + (pose.forward_speed - cmd.forward) * decay
    lat = cmd.lateral + (pose.lateral_speed - cmd.lateral) * decay
    d_fwd = cmd.forward * dt + (pose.forward_speed - cmd.forward) * tau * (1.0 - decay)
    d_lat = cmd.lateral * dt + (pose.lateral_speed - cmd.lateral) * tau * (1.0 - decay)
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    return Pose(
        x=pose.x + d_fwd * c - d_lat * s,
        y=pose.y + d_fwd * s + d_lat * c,
        heading=pose.heading,
        forward_speed=fwd,
        lateral_speed=lat,
    )


# -- episode -----------------------------------------------------------------

def start_pose(world: ArenaWorld, sim: SimConfig) -> Pose:
    hd = world.heading
    offset = 0.0
    if sim.seed is not None:
        rng = np.random.default_rng(sim.seed)
        offset = float(rng.uniform(-sim.start_offset_range, sim.start_offset_range))
    sx, sy = world.start
    return Pose(x=sx - offset * math.sin(hd), y=sy + offset * math.cos(hd), heading=hd)


def _along(world: ArenaWorld, x: float, y: float) -> float:
    hd = world.heading
    return (x - world.start[0]) * math.cos(hd) + (y - world.start[1]) * math.sin(hd)


def collided(pose: Pose, world: ArenaWorld) -> bool:
    r = world.vehicle_radius
    if world.obstacle is not None and world.obstacle.distance(pose.x, pose.y) <= r:
        return True
    return min(pose.x, pose.y, world.width - pose.x, world.depth - pose.y) <= r


def run_episode(world: ArenaWorld, p: Params, sim: SimConfig = SimConfig()) -> EpisodeTrace:
    errs = validate_world(world)
    if errs:
        raise ArenaError("; ".join(errs))
    sched = replace(sim.scheduler, dt=sim.dt)
    pose = start_pose(world, sim)
    state = LayerState.initial(p, sim.width, sim.height)
    ts = TaskState(forward_cmd=sched.cruise_speed)
    goal = _along(world, *world.destination)
    trace = EpisodeTrace()
    max_frames = int(round(sim.max_time * sim.fps))

    for f in range(max_frames):
        if not world.inside(pose.x, pose.y):
            trace.set_outcome(Outcome.OUT_OF_BOUNDS)
            break
        if collided(pose, world):
            trace.set_outcome(Outcome.COLLIDED)
            break
        frame = render_view(pose, world, sim.width, sim.height, sim.fov_deg)
        result, state = pipeline_step(state, frame, p)
        reached = _along(world, pose.x, pose.y) >= goal
        c_lgmd = result.c_lgmd if sim.detect else False
        ts, cmd = decision.scheduler_step(
            ts, c_lgmd, result.c_ffi, sched, reached=reached, balance=result.balance
        )
        trace.records.append(EpisodeRecord(frame=f, pose=pose, result=result, task=ts))
        if reached and ts.task is not Task.AVOID:
            trace.set_outcome(Outcome.REACHED)
            break
        pose = dynamics_step(pose, cmd, sim.dt, sim.tau)
    else:
        trace.set_outcome(Outcome.TIMEOUT)
    trace.final_pose = pose
    return trace


@dataclass(frozen=True)
class TrajectoryReport:
    outcome: Outcome
    min_clearance: float
    detection_frame: Optional[int]
    frames_before_impact: Optional[float]
    avoid_maneuvers: int
    undetected: bool
    intersections: int

    def lines(self) -> List[str]:
        det = "none" if self.detection_frame is None else str(self.detection_frame)
        fbi = "n/a" if self.frames_before_impact is None else f"{self.frames_before_impact:.1f}"
        return [
            f"outcome: {self.outcome.value}",
            f"min_clearance_m: {self.min_clearance:.4f}",
            f"detection_frame: {det}",
            f"frames_before_impact: {fbi}",
            f"avoid_maneuvers: {self.avoid_maneuvers}",
            f"undetected: {str(self.undetected).lower()}",
            f"footprint_intersections: {self.intersections}",
        ]


def _impact_distance(pose: Pose, world: ArenaWorld) -> Optional[float]:
    """Distance along the heading until the inflated footprint is touched, if ever."""
    box = world.obstacle
    if box is None:
        return None
    r = world.vehicle_radius
    c, s = math.cos(pose.heading), math.sin(pose.heading)
    x0, y0, x1, y1 = box.bounds
    # march the inflated rectangle; exact enough for reporting
    ts = np.linspace(0.0, world.width + world.depth, 4001)
    xs, ys = pose.x + ts * c, pose.y + ts * s
    dx = np.maximum(np.maximum(x0 - xs, 0.0), xs - x1)
    dy = np.maximum(np.maximum(y0 - ys, 0.0), ys - y1)
    hit = np.nonzero(np.hypot(dx, dy) <= r)[0]
    return float(ts[hit[0]]) if hit.size else None


def check_trajectory(trace: EpisodeTrace, world: ArenaWorld, fps: float = FPS) -> TrajectoryReport:
    poses = [rec.pose for rec in trace.records]
    if trace.final_pose is not None:
        poses.append(trace.final_pose)
    box = world.obstacle
    if box is None or not poses:
        clearance = math.inf
        intersections = 0
    else:
        dists = np.array([box.distance(p.x, p.y) for p in poses]) - world.vehicle_radius
        clearance = float(dists.min())
        intersections = int(np.count_nonzero(dists <= 0))
    det = next((rec.frame for rec in trace.records if rec.result.c_lgmd), None)
    fbi = None
    if det is not None:
        pose = trace.records[det].pose
        dist = _impact_distance(pose, world)
        if dist is not None and pose.forward_speed > 0:
            fbi = dist / (pose.forward_speed / fps)
    return TrajectoryReport(
        outcome=trace.outcome,
        min_clearance=clearance,
        detection_frame=det,
        frames_before_impact=fbi,
        avoid_maneuvers=trace.avoid_count,
        undetected=trace.outcome is Outcome.COLLIDED and det is None,
        intersections=intersections,
    )
