"""Shared domain types and the network parameter set."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import List, Optional, Tuple

import numpy as np

FRAME_WIDTH = 99
FRAME_HEIGHT = 72
FPS = 30.0
FOV_DEG = 70.0


class NormMode(str, enum.Enum):
    LITERAL = "literal"
    RECONSTRUCTED = "reconstructed"


class BorderMode(str, enum.Enum):
    ZERO_PAD = "zero_pad"


@dataclass(frozen=True, eq=False)
class Frame:
    """One 8-bit luminance image, stored as a (height, width) uint8 array."""

    luminance: np.ndarray

    def __post_init__(self):
        lum = np.asarray(self.luminance)
        if lum.ndim != 2:
            raise ValueError(f"frame must be 2-D, got shape {lum.shape}")
        h, w = lum.shape
        if w < 5 or h < 5:
            raise ValueError(f"frame {w}x{h} is smaller than the 5x5 inhibition window")
        if lum.dtype != np.uint8:
            if np.any(lum < 0) or np.any(lum > 255):
                raise ValueError("luminance values must lie in [0, 255]")
            lum = lum.astype(np.uint8)
        lum.setflags(write=False)
        object.__setattr__(self, "luminance", lum)

    @property
    def width(self) -> int:
        return self.luminance.shape[1]

    @property
    def height(self) -> int:
        return self.luminance.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.luminance.shape

    @classmethod
    def uniform(cls, value: int, width: int = FRAME_WIDTH, height: int = FRAME_HEIGHT) -> Frame:
        return cls(np.full((height, width), value, dtype=np.uint8))

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.luminance, other.luminance))


@dataclass(frozen=True)
class Params:
    W_I: float = 1.0        # inhibition coefficient
    C_w: float = 4.0        # grouping decay constant
    T_FFI: float = 90.0     # FFI threshold, mean |dL| units
    T_de: float = 500.0     # grouping decay threshold
    T_s: float = 35.0       # spiking threshold
    n_cell: int = FRAME_WIDTH * FRAME_HEIGHT
    n_sp: int = 5           # consecutive spikes for a collision
    C_1: float = 150.0
    C_2: float = 80.0
    r: int = 2              # inhibition radius, fixed
    norm_mode: NormMode = NormMode.RECONSTRUCTED
    border_mode: BorderMode = BorderMode.ZERO_PAD

    def __post_init__(self):
        object.__setattr__(self, "norm_mode", NormMode(self.norm_mode))
        object.__setattr__(self, "border_mode", BorderMode(self.border_mode))


def params_default() -> Params:
    return Params()


_POSITIVE = ("W_I", "C_w", "T_FFI", "T_de", "T_s", "n_cell", "n_sp", "C_1", "C_2")


def params_validate(p: Params, frame_w: int = FRAME_WIDTH, frame_h: int = FRAME_HEIGHT) -> List[str]:
    """Return every violated parameter invariant; an empty list means valid."""
    violations = []
    for name in _POSITIVE:
        value = getattr(p, name)
        if not value > 0:
            violations.append(f"{name} must be positive (got {value})")
    if p.r != 2:
        violations.append(f"r is fixed at 2 (got {p.r})")
    if frame_w < 2 * p.r + 1 or frame_h < 2 * p.r + 1:
        violations.append(f"frame {frame_w}x{frame_h} smaller than {2 * p.r + 1}x{2 * p.r + 1}")
    if p.n_cell != frame_w * frame_h:
        violations.append(f"n_cell ≠ {frame_w * frame_h} (got {p.n_cell})")
    return violations


@dataclass(frozen=True, eq=False)
class LayerState:
    """Rolling per-stream state carried between frames.

    ``prev_p`` is the previous frame's P matrix (feeds the delayed inhibition
    and the FFI cell). ``spike_window`` holds the newest ``capacity`` spike
    flags, newest last.
    """

    width: int = FRAME_WIDTH
    height: int = FRAME_HEIGHT
    capacity: int = 5
    prev_luminance: Optional[Frame] = None
    prev_p: Optional[np.ndarray] = None
    spike_window: Tuple[bool, ...] = ()
    frame_index: int = 0

    def __post_init__(self):
        if self.prev_p is None:
            object.__setattr__(self, "prev_p", np.zeros((self.height, self.width)))
        if self.prev_p.shape != (self.height, self.width):
            raise ValueError(f"prev_p shape {self.prev_p.shape} != {(self.height, self.width)}")
        if len(self.spike_window) > self.capacity:
            raise ValueError("spike window exceeds capacity")

    @classmethod
    def initial(cls, params: Params, width: int = FRAME_WIDTH, height: int = FRAME_HEIGHT) -> LayerState:
        return cls(width=width, height=height, capacity=params.n_sp)


@dataclass(frozen=True)
class FrameResult:
    k_raw: float = 0.0
    kappa: float = 0.0
    ffi: float = 0.0
    spike: bool = False
    c_lgmd: bool = False
    c_ffi: bool = False
    balance: float = 0.0    # (right - left) share of grouped excitation, in [-1, 1]


def param_names() -> List[str]:
    return [f.name for f in fields(Params)]
