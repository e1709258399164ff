"""Frame files, trace CSVs and flat ``key = value`` configuration files."""

from __future__ import annotations

import csv
import math
import os
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .arena import ArenaWorld, EpisodeTrace, SimConfig, validate_world
from .core import FRAME_HEIGHT, FRAME_WIDTH, Frame, FrameResult, Params, params_validate
from .decision import SchedulerConfig
from .stimulus import StimulusSpec

PathLike = Union[str, os.PathLike]


class FrameFormatError(ValueError):
    """Unreadable frame file; the message names the file and byte offset."""

    def __init__(self, path, offset: int, message: str):
        super().__init__(f"{path}: byte {offset}: {message}")
        self.path = str(path)
        self.offset = offset


class ConfigError(ValueError):
    def __init__(self, problems: Sequence[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


# -- frames ------------------------------------------------------------------

FORMAT_SUFFIXES = {"pgm": (".pgm",), "y8": (".y8", ".raw")}


def _token(data: bytes, pos: int, path) -> tuple:
    """Next whitespace-delimited header token, skipping ``#`` comments."""
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FrameFormatError(path, start, "truncated header")
    return data[start:pos], pos


def parse_pgm(data: bytes, path="<bytes>") -> Frame:
    """Decode a binary P5 greymap with maxval 255."""
    if data[:2] != b"P5":
        raise FrameFormatError(path, 0, "not a binary PGM (expected magic P5)")
    pos = 2
    values = []
    for name in ("width", "height", "maxval"):
        at = pos
        tok, pos = _token(data, pos, path)
        if not tok.isdigit():
            raise FrameFormatError(path, at, f"malformed {name} {tok!r}")
        values.append(int(tok))
    w, h, maxval = values
    if maxval != 255:
        raise FrameFormatError(path, pos, f"unsupported maxval {maxval}")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise FrameFormatError(path, pos, "missing whitespace after header")
    pos += 1
    need = w * h
    have = len(data) - pos
    if have != need:
        raise FrameFormatError(path, pos, f"pixel data holds {have} bytes, expected {need} for {w}x{h}")
    try:
        return Frame(np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(h, w))
    except ValueError as exc:
        raise FrameFormatError(path, pos, str(exc)) from None


def encode_pgm(frame: Frame) -> bytes:
    return b"P5\n%d %d\n255\n" % (frame.width, frame.height) + frame.luminance.tobytes()


def write_pgm(frame: Frame, path: PathLike):
    Path(path).write_bytes(encode_pgm(frame))


def write_frames(frames: Iterable[Frame], out_dir: PathLike, prefix: str = "frame") -> List[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, frame in enumerate(frames):
        p = out / f"{prefix}_{i:04d}.pgm"
        write_pgm(frame, p)
        paths.append(p)
    return paths


def parse_y8(data: bytes, width: int, height: int, path="<bytes>") -> Frame:
    need = width * height
    if len(data) != need:
        raise FrameFormatError(path, min(len(data), need),
                               f"raw file holds {len(data)} bytes, expected {need} for {width}x{height}")
    return Frame(np.frombuffer(data, dtype=np.uint8).reshape(height, width))


def list_frame_files(path: Union[PathLike, Sequence[PathLike]], fmt: str = "pgm") -> List[Path]:
    """Directory contents with the format's suffix, or an explicit file list, in name order."""
    if fmt not in FORMAT_SUFFIXES:
        raise ValueError(f"unknown frame format {fmt!r}")
    if isinstance(path, (str, os.PathLike)):
        p = Path(path)
        if p.is_dir():
            files = [q for q in p.iterdir() if q.is_file() and q.suffix.lower() in FORMAT_SUFFIXES[fmt]]
        else:
            files = [p]
    else:
        files = [Path(q) for q in path]
    files.sort(key=lambda q: q.name)
    return files


def read_frames(
    path: Union[PathLike, Sequence[PathLike]],
    fmt: str = "pgm",
    width: int = FRAME_WIDTH,
    height: int = FRAME_HEIGHT,
) -> List[Frame]:
    """Load a frame sequence; frames of another size are area-downsampled to ``width`` x ``height``."""
    frames = []
    for f in list_frame_files(path, fmt):
        try:
            data = f.read_bytes()
        except OSError as exc:
            raise FrameFormatError(f, 0, exc.strerror or "cannot read file") from None
        frame = parse_pgm(data, f) if fmt == "pgm" else parse_y8(data, width, height, f)
        if (frame.width, frame.height) != (width, height):
            try:
                frame = downsample(frame, width, height)
            except ValueError as exc:
                raise FrameFormatError(f, 0, str(exc)) from None
        frames.append(frame)
    return frames


def _area_weights(src: int, dst: int) -> np.ndarray:
    """(dst, src) matrix of overlap lengths between output cells and input pixels, rows summing to 1."""
    edges = np.arange(dst + 1) * (src / dst)
    lo, hi = edges[:-1, None], edges[1:, None]
    px = np.arange(src)[None, :]
    overlap = np.clip(np.minimum(hi, px + 1) - np.maximum(lo, px), 0.0, None)
    return overlap / overlap.sum(axis=1, keepdims=True)


def downsample_array(lum: np.ndarray, dst_w: int, dst_h: int) -> np.ndarray:
    """Box-filter area averaging of a (height, width) array, rounded half up to uint8."""
    lum = np.asarray(lum)
    h, w = lum.shape
    if dst_w < 1 or dst_h < 1:
        raise ValueError("destination size must be positive")
    if dst_w > w or dst_h > h:
        raise ValueError(f"cannot upscale {w}x{h} to {dst_w}x{dst_h}")
    wy = _area_weights(h, dst_h)
    wx = _area_weights(w, dst_w)
    mean = wy @ lum.astype(np.float64) @ wx.T
    return np.clip(np.floor(mean + 0.5), 0, 255).astype(np.uint8)


def downsample(src: Frame, dst_w: int, dst_h: int) -> Frame:
    """Resize a frame to ``dst_w`` x ``dst_h`` by area averaging; equal sizes return ``src``."""
    if (dst_w, dst_h) == (src.width, src.height):
        return src
    return Frame(downsample_array(src.luminance, dst_w, dst_h))


# -- traces ------------------------------------------------------------------

TRACE_HEADER = ("frame", "K", "kappa", "F", "spike", "c_lgmd", "c_ffi", "task", "x", "y")


@dataclass(frozen=True)
class TraceRow:
    frame: int
    K: float
    kappa: float
    F: float
    spike: bool
    c_lgmd: bool
    c_ffi: bool
    task: str = ""
    x: Optional[float] = None
    y: Optional[float] = None

    @classmethod
    def from_result(cls, frame: int, res: FrameResult, task: str = "", x=None, y=None) -> TraceRow:
        return cls(frame, res.k_raw, res.kappa, res.ffi, res.spike, res.c_lgmd, res.c_ffi, task, x, y)


def rows_from_results(results: Sequence[FrameResult]) -> List[TraceRow]:
    return [TraceRow.from_result(i, r) for i, r in enumerate(results)]


def rows_from_episode(trace: EpisodeTrace) -> List[TraceRow]:
    return [
        TraceRow.from_result(rec.frame, rec.result, rec.task.task.value, rec.pose.x, rec.pose.y)
        for rec in trace.records
    ]


def _num(v: Optional[float]) -> str:
    return "" if v is None else repr(float(v))


def write_trace(rows: Iterable[TraceRow], path: PathLike):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for r in rows:
            w.writerow([r.frame, _num(r.K), _num(r.kappa), _num(r.F), int(r.spike), int(r.c_lgmd),
                        int(r.c_ffi), r.task, _num(r.x), _num(r.y)])


def read_trace(path: PathLike) -> List[TraceRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header}")
        rows = []
        for vals in reader:
            f, k, kappa, ffi, sp, cl, cf, task, x, y = vals
            rows.append(TraceRow(
                int(f), float(k), float(kappa), float(ffi), sp == "1", cl == "1", cf == "1", task,
                float(x) if x else None, float(y) if y else None,
            ))
    return rows


# -- configuration -----------------------------------------------------------

_SIM_KEYS = ("fps", "tau", "max_time", "detect", "start_offset_range", "seed", "fov_deg")
_SCHED_KEYS = tuple(f.name for f in fields(SchedulerConfig) if f.name != "dt")
_STIM_KEYS = ("frames", "object_luminance", "background_luminance", "start_size", "end_size",
              "size", "speed", "period", "drift", "pan", "texture", "onset", "seed")
_WORLD_KEYS = {
    "arena_width": "width", "arena_depth": "depth", "wall_texture": "wall_texture",
    "wall_dark": "wall_dark", "wall_light": "wall_light", "vehicle_radius": "vehicle_radius",
    "camera_height": "camera_height",
}
_BOX_KEYS = {
    "box_cx": "cx", "box_cy": "cy", "box_size_x": "size_x", "box_size_y": "size_y",
    "box_height": "height", "box_texture": "texture", "box_dark": "dark", "box_light": "light",
}
_POINT_KEYS = ("start_x", "start_y", "dest_x", "dest_y")


def _known_keys() -> List[str]:
    keys = [f.name for f in fields(Params)] + ["width", "height"]
    keys += list(_SIM_KEYS) + list(_SCHED_KEYS) + ["stim_" + k for k in _STIM_KEYS]
    keys += list(_WORLD_KEYS) + list(_BOX_KEYS) + list(_POINT_KEYS) + ["obstacle"]
    return keys


KNOWN_KEYS = frozenset(_known_keys())

_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


def parse_config_text(text: str, source: str = "<config>") -> Dict[str, str]:
    """Raw ``key -> value`` strings; later duplicates win. Unknown keys are errors."""
    out: Dict[str, str] = {}
    problems = []
    for n, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        m = _LINE.match(body)
        if m is None:
            problems.append(f"{source}:{n}: expected 'key = value'")
            continue
        key, value = m.group(1), m.group(2)
        if key not in KNOWN_KEYS:
            problems.append(f"{source}:{n}: unknown key {key!r}")
            continue
        if value == "":
            problems.append(f"{source}:{n}: missing value for {key!r}")
            continue
        out[key] = value
    if problems:
        raise ConfigError(problems)
    return out


@dataclass(frozen=True)
class Config:
    """Everything a config file can set, with defaults for anything omitted."""

    params: Params = field(default_factory=Params)
    width: int = FRAME_WIDTH
    height: int = FRAME_HEIGHT
    sim: SimConfig = field(default_factory=SimConfig)
    world: ArenaWorld = field(default_factory=ArenaWorld)
    stim: Dict[str, object] = field(default_factory=dict)   # overrides for default_spec


def _coerce(key: str, raw: str, like):
    if isinstance(like, bool):
        v = _BOOL.get(raw.lower())
        if v is None:
            raise ValueError(f"{key}: expected a boolean, got {raw!r}")
        return v
    if isinstance(like, int):
        try:
            return int(raw)
        except ValueError:
            f = float(raw)
            if not f.is_integer():
                raise ValueError(f"{key}: expected an integer, got {raw!r}") from None
            return int(f)
    if isinstance(like, float):
        try:
            v = float(raw)
        except ValueError:
            raise ValueError(f"{key}: expected a number, got {raw!r}") from None
        if not math.isfinite(v):
            raise ValueError(f"{key}: value must be finite")
        return v
    return raw


def build_config(raw: Dict[str, str]) -> Config:
    """Turn raw strings into validated config objects, collecting every problem."""
    problems: List[str] = []

    def take(key, like):
        try:
            return _coerce(key, raw[key], like)
        except ValueError as exc:
            problems.append(str(exc))
            return like

    width = take("width", FRAME_WIDTH) if "width" in raw else FRAME_WIDTH
    height = take("height", FRAME_HEIGHT) if "height" in raw else FRAME_HEIGHT

    defaults = Params()
    pkw = {}
    for f in fields(Params):
        if f.name in raw:
            like = getattr(defaults, f.name)
            pkw[f.name] = raw[f.name] if f.name in ("norm_mode", "border_mode") else take(f.name, like)
    pkw.setdefault("n_cell", width * height)
    try:
        params = Params(**pkw)
    except ValueError as exc:
        problems.append(str(exc))
        params = replace(defaults, n_cell=width * height)

    sdef = SchedulerConfig()
    sched = replace(sdef, **{k: take(k, getattr(sdef, k)) for k in _SCHED_KEYS if k in raw})
    if sched.shift_side not in ("right", "left", "away"):
        problems.append(f"shift_side must be right, left or away (got {sched.shift_side!r})")
    simdef = SimConfig()
    skw = {}
    for k in _SIM_KEYS:
        if k not in raw:
            continue
        if k == "seed":
            skw[k] = None if raw[k].lower() == "none" else take(k, 0)
        else:
            skw[k] = take(k, getattr(simdef, k))
    sim = replace(simdef, width=width, height=height, scheduler=sched, **skw)
    if sim.fps <= 0 or sim.tau <= 0 or sim.max_time <= 0:
        problems.append("fps, tau and max_time must be positive")

    wdef = ArenaWorld()
    bdef = wdef.obstacle
    wkw = {attr: take(key, getattr(wdef, attr)) for key, attr in _WORLD_KEYS.items() if key in raw}
    box = replace(bdef, **{attr: take(key, getattr(bdef, attr)) for key, attr in _BOX_KEYS.items() if key in raw})
    if "obstacle" in raw and not take("obstacle", True):
        box = None
    sx, sy = wdef.start
    dx, dy = wdef.destination
    pts = {"start_x": sx, "start_y": sy, "dest_x": dx, "dest_y": dy}
    pts.update({k: take(k, v) for k, v in pts.items() if k in raw})
    world = replace(wdef, obstacle=box, start=(pts["start_x"], pts["start_y"]),
                    destination=(pts["dest_x"], pts["dest_y"]), **wkw)

    stim = {}
    sdefault = StimulusSpec()
    for k in _STIM_KEYS:
        if "stim_" + k in raw:
            stim[k] = take("stim_" + k, getattr(sdefault, k))

    if not problems:
        problems.extend(params_validate(params, width, height))
        problems.extend(validate_world(world))
    if problems:
        raise ConfigError(problems)
    return Config(params=params, width=width, height=height, sim=sim, world=world, stim=stim)


def load_config(*paths: PathLike) -> Config:
    """Read one or more config files (later files override earlier ones)."""
    raw: Dict[str, str] = {}
    for p in paths:
        try:
            text = Path(p).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"{p}: {exc.strerror or 'cannot read file'}"]) from None
        raw.update(parse_config_text(text, str(p)))
    return build_config(raw)


def dump_config(cfg: Config) -> str:
    """Serialize the model parameters and frame size as a config file."""
    lines = [f"width = {cfg.width}", f"height = {cfg.height}"]
    for f in fields(Params):
        v = getattr(cfg.params, f.name)
        lines.append(f"{f.name} = {v.value if hasattr(v, 'value') else repr(v)}")
    return "\n".join(lines) + "\n"
