"""Synthetic test stimuli: looming, lateral translation, drifting gratings, pan."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, replace
from typing import List, Optional

import numpy as np

from .core import FRAME_HEIGHT, FRAME_WIDTH, Frame


class Kind(str, enum.Enum):
    LOOMING = "looming"
    TRANSLATE = "translate"
    GRATING = "grating"
    ROTATE = "rotate"


class StimulusError(ValueError):
    pass


@dataclass(frozen=True)
class StimulusSpec:
    """Parameters of one synthetic sequence.

    Sizes are fractions of the frame width; speeds are pixels per frame.
    ``onset`` is the number of static frames shown before motion starts
    (translate, grating, rotate).
    """

    kind: Kind = Kind.LOOMING
    frames: int = 60
    width: int = FRAME_WIDTH
    height: int = FRAME_HEIGHT
    object_luminance: int = 30
    background_luminance: int = 220
    start_size: float = 0.1     # looming
    end_size: float = 0.9       # looming
    size: float = 0.3           # translate
    speed: float = 2.0          # translate
    period: int = 8             # grating
    drift: int = 3              # grating
    pan: int = 4                # rotate
    texture: int = 2            # rotate, texture block size in pixels
    onset: int = 2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


# Per-kind calibration of contrast; see README for the rationale.
_KIND_DEFAULTS = {
    Kind.LOOMING: {"object_luminance": 10, "background_luminance": 245, "start_size": 0.2},
    Kind.TRANSLATE: {"object_luminance": 10, "background_luminance": 245},
    Kind.GRATING: {"object_luminance": 66, "background_luminance": 190},
    Kind.ROTATE: {"object_luminance": 20, "background_luminance": 235},
}


def default_spec(kind, **overrides) -> StimulusSpec:
    kind = Kind(kind)
    spec = StimulusSpec(kind=kind, **_KIND_DEFAULTS[kind])
    return replace(spec, **overrides) if overrides else spec


def validate_spec(spec: StimulusSpec) -> List[str]:
    errs = []
    if spec.frames < 1:
        errs.append("frames must be at least 1")
    if spec.width < 5 or spec.height < 5:
        errs.append("frame must be at least 5x5")
    for name in ("object_luminance", "background_luminance"):
        v = getattr(spec, name)
        if not 0 <= v <= 255:
            errs.append(f"{name} must lie in [0, 255]")
    for name in ("speed", "drift", "pan", "onset"):
        if getattr(spec, name) < 0:
            errs.append(f"{name} must be non-negative")
    if spec.kind is Kind.LOOMING:
        if not 0 < spec.start_size < spec.end_size <= 1.0:
            errs.append("looming sizes need 0 < start_size < end_size <= 1")
    if spec.kind is Kind.TRANSLATE and not 0 < spec.size <= 1.0:
        errs.append("translate size must lie in (0, 1]")
    if spec.kind is Kind.GRATING and spec.period < 2:
        errs.append("grating period must be at least 2 pixels")
    if spec.kind is Kind.ROTATE and spec.texture < 1:
        errs.append("texture block size must be at least 1")
    return errs


def _check(spec: StimulusSpec, kind: Kind):
    if spec.kind is not kind:
        raise StimulusError(f"expected a {kind.value} spec, got {spec.kind.value}")
    errs = validate_spec(spec)
    if errs:
        raise StimulusError("; ".join(errs))


def _square(spec: StimulusSpec, edge: int, cx: float, cy: float) -> np.ndarray:
    img = np.full((spec.height, spec.width), spec.background_luminance, dtype=np.uint8)
    left = int(np.floor(cx - edge / 2.0 + 0.5))
    top = int(np.floor(cy - edge / 2.0 + 0.5))
    x0, x1 = max(left, 0), min(left + edge, spec.width)
    y0, y1 = max(top, 0), min(top + edge, spec.height)
    if x1 > x0 and y1 > y0:
        img[y0:y1, x0:x1] = spec.object_luminance
    return img


def looming_edges(spec: StimulusSpec) -> np.ndarray:
    """Edge length (pixels) per frame for a constant-velocity approach.

    size(t) = k / (t_c - t), pinned to start_size at frame 0 and end_size at
    the final frame.
    """
    n = spec.frames
    s0 = spec.start_size * spec.width
    s1 = spec.end_size * spec.width
    if n == 1:
        return np.array([int(round(s1))])
    t_end = n - 1
    # s0 * t_c = s1 * (t_c - t_end)
    t_c = s1 * t_end / (s1 - s0)
    k = s0 * t_c
    t = np.arange(n)
    sizes = k / (t_c - t)
    return np.floor(sizes + 0.5).astype(int)


def gen_looming(spec: StimulusSpec) -> List[Frame]:
    _check(spec, Kind.LOOMING)
    cx, cy = spec.width / 2.0, spec.height / 2.0
    return [Frame(_square(spec, int(e), cx, cy)) for e in looming_edges(spec)]


def gen_translate(spec: StimulusSpec) -> List[Frame]:
    _check(spec, Kind.TRANSLATE)
    edge = max(1, int(round(spec.size * spec.width)))
    cy = spec.height / 2.0
    x_start = -edge / 2.0  # square starts just beyond the left border and slides in
    frames = []
    for f in range(spec.frames):
        moved = max(0, f - spec.onset)
        cx = x_start + spec.speed * moved
        frames.append(Frame(_square(spec, edge, cx, cy)))
    return frames


def gen_grating(spec: StimulusSpec) -> List[Frame]:
    _check(spec, Kind.GRATING)
    x = np.arange(spec.width)
    frames = []
    for f in range(spec.frames):
        phase = spec.drift * max(0, f - spec.onset)
        dark = ((x - phase) % spec.period) < spec.period / 2.0
        row = np.where(dark, spec.object_luminance, spec.background_luminance).astype(np.uint8)
        frames.append(Frame(np.tile(row, (spec.height, 1))))
    return frames


def panorama(spec: StimulusSpec) -> np.ndarray:
    """Seeded two-tone block texture wide enough for the whole pan."""
    moving = max(0, spec.frames - 1 - spec.onset)
    total_w = spec.width + spec.pan * moving
    rng = np.random.default_rng(spec.seed)
    bw = spec.texture
    nbx = -(-total_w // bw)
    nby = -(-spec.height // bw)
    blocks = rng.integers(0, 2, size=(nby, nbx), dtype=np.uint8)
    tex = np.kron(blocks, np.ones((bw, bw), dtype=np.uint8))[: spec.height, :total_w]
    return np.where(tex == 1, spec.object_luminance, spec.background_luminance).astype(np.uint8)


def gen_rotate(spec: StimulusSpec) -> List[Frame]:
    _check(spec, Kind.ROTATE)
    pano = panorama(spec)
    frames = []
    for f in range(spec.frames):
        off = spec.pan * max(0, f - spec.onset)
        frames.append(Frame(pano[:, off:off + spec.width].copy()))
    return frames


GENERATORS = {
    Kind.LOOMING: gen_looming,
    Kind.TRANSLATE: gen_translate,
    Kind.GRATING: gen_grating,
    Kind.ROTATE: gen_rotate,
}


def generate(spec: StimulusSpec) -> List[Frame]:
    return GENERATORS[spec.kind](spec)
