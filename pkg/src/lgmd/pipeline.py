"""Per-frame LGMD layer cascade.

Layers are computed on float64 matrices shaped (height, width). Both
convolutions use zero padding and accumulate their taps in a fixed
row-major order, so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Tuple

import numpy as np

from . import decision
from .core import Frame, FrameResult, LayerState, NormMode, Params


def inhibition_kernel(r: int = 2) -> np.ndarray:
    """5x5 lateral inhibition weights: 0.25 / distance, zero at the centre."""
    i, j = np.mgrid[-r:r + 1, -r:r + 1]
    dist = np.hypot(i, j)
    with np.errstate(divide="ignore"):
        w = np.where(dist > 0, 0.25 / dist, 0.0)
    return w


def grouping_kernel() -> np.ndarray:
    return np.full((3, 3), 1.0 / 9.0)


INHIBITION_KERNEL = inhibition_kernel()
GROUPING_KERNEL = grouping_kernel()


def correlate_zero_pad(x: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """out[y, x] = sum_k kernel[dy, dx] * x[y + dy, x + dx], out-of-range reads 0.

    Taps are accumulated in row-major kernel order; zero taps are skipped.
    """
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    h, w = x.shape
    padded = np.zeros((h + 2 * ry, w + 2 * rx))
    padded[ry:ry + h, rx:rx + w] = x
    out = np.zeros((h, w))
    for a in range(kh):
        for b in range(kw):
            weight = kernel[a, b]
            if weight == 0.0:
                continue
            out += weight * padded[a:a + h, b:b + w]
    return out


def _check_same(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def p_layer(cur: Frame, prev: Frame) -> np.ndarray:
    if cur.shape != prev.shape:
        raise ValueError(f"dimension mismatch: {cur.shape} vs {prev.shape}")
    return cur.luminance.astype(np.float64) - prev.luminance.astype(np.float64)


def i_layer(prev_p: np.ndarray) -> np.ndarray:
    # kernel is symmetric, so correlation equals convolution
    return correlate_zero_pad(np.asarray(prev_p, dtype=np.float64), INHIBITION_KERNEL)


def s_layer(e: np.ndarray, i: np.ndarray, W_I: float) -> np.ndarray:
    _check_same(e, i)
    return np.where(e * i <= 0, e, e - i * W_I)


def ce_layer(s: np.ndarray) -> np.ndarray:
    return correlate_zero_pad(np.asarray(s, dtype=np.float64), GROUPING_KERNEL)


def g_layer(s: np.ndarray, ce: np.ndarray, C_w: float, T_de: float) -> np.ndarray:
    _check_same(s, ce)
    omega = 0.01 + np.max(np.abs(ce / C_w))
    g = s * ce / omega
    return np.where(g >= T_de, g, 0.0)


def membrane_potential(g: np.ndarray) -> float:
    return float(np.sum(np.abs(g)))


def normalize(K_f: float, p: Params) -> float:
    if p.norm_mode is NormMode.LITERAL:
        return float(np.tanh(np.sqrt(K_f) - p.n_cell * p.C_1) / (p.n_cell * p.C_2))
    return float(100.0 * max(0.0, np.tanh((np.sqrt(K_f) - p.C_1) / p.C_2)))


def excitation_balance(g: np.ndarray) -> float:
    """Right-minus-left share of |G~| mass; the centre column counts for neither side."""
    mass = np.abs(g).sum(axis=0)
    total = mass.sum()
    if total == 0:
        return 0.0
    w = g.shape[1]
    half = w // 2
    left = mass[:half].sum()
    right = mass[w - half:].sum()
    return float((right - left) / total)


def ffi_level(prev_p: np.ndarray, n_cell: int) -> float:
    return float(np.sum(np.abs(prev_p)) / n_cell)


def pipeline_step(state: LayerState, frame: Frame, p: Params) -> Tuple[FrameResult, LayerState]:
    """Run one frame through the cascade and return the result and the next state.

    The state is never mutated. The first frame of a stream yields an all-zero
    result because there is no previous luminance to difference against.
    """
    if (frame.width, frame.height) != (state.width, state.height):
        raise ValueError(
            f"frame {frame.width}x{frame.height} does not match state {state.width}x{state.height}"
        )

    if state.prev_luminance is None:
        nxt = replace(
            state,
            prev_luminance=frame,
            prev_p=np.zeros((state.height, state.width)),
            spike_window=decision.push_spike(state.spike_window, False, state.capacity),
            frame_index=state.frame_index + 1,
        )
        return FrameResult(), nxt

    p_cur = p_layer(frame, state.prev_luminance)
    e = p_cur
    i = i_layer(state.prev_p)
    s = s_layer(e, i, p.W_I)
    ce = ce_layer(s)
    g = g_layer(s, ce, p.C_w, p.T_de)
    k = membrane_potential(g)
    kappa = normalize(k, p)
    ffi = ffi_level(state.prev_p, p.n_cell)

    spiked = decision.spike(kappa, p.T_s)
    c_ffi = decision.ffi_trigger(ffi, p.T_FFI)
    # FFI inhibits the spike immediately, so it cannot extend a persistence run
    window = decision.push_spike(state.spike_window, spiked and not c_ffi, state.capacity)
    c_lgmd = decision.collision_confirm(window, p.n_sp)

    result = FrameResult(
        k_raw=k, kappa=kappa, ffi=ffi, spike=spiked, c_lgmd=c_lgmd, c_ffi=c_ffi,
        balance=excitation_balance(g),
    )
    nxt = replace(
        state,
        prev_luminance=frame,
        prev_p=p_cur,
        spike_window=window,
        frame_index=state.frame_index + 1,
    )
    return result, nxt


def run_sequence(frames, p: Params):
    """Feed frames through a fresh stream; returns the list of FrameResults."""
    frames = list(frames)
    if not frames:
        return []
    state = LayerState.initial(p, frames[0].width, frames[0].height)
    results = []
    for frame in frames:
        res, state = pipeline_step(state, frame, p)
        results.append(res)
    return results
