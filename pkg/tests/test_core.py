import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lgmd.core import (
    FRAME_HEIGHT, FRAME_WIDTH, Frame, LayerState, NormMode, Params, param_names, params_default,
    params_validate,
)


def test_default_parameter_values():
    p = params_default()
    assert (p.W_I, p.C_w, p.T_FFI, p.T_de, p.T_s) == (1.0, 4.0, 90.0, 500.0, 35.0)
    assert (p.n_cell, p.n_sp, p.C_1, p.C_2) == (7128, 5, 150.0, 80.0)
    assert p.r == 2


def test_cell_count_is_the_frame_area():
    assert FRAME_WIDTH * FRAME_HEIGHT == params_default().n_cell


def test_default_mode_is_reconstructed():
    assert params_default().norm_mode is NormMode.RECONSTRUCTED
    assert Params(norm_mode="literal").norm_mode is NormMode.LITERAL


def test_defaults_validate_clean():
    assert params_validate(params_default()) == []


def test_negative_threshold_is_reported():
    errs = params_validate(Params(T_s=-1.0))
    assert len(errs) == 1 and "T_s" in errs[0]


def test_violations_are_aggregated():
    errs = params_validate(Params(T_s=0.0, C_w=-2.0, r=3, n_cell=100))
    assert len(errs) == 4


def test_n_cell_must_track_frame_size():
    assert params_validate(Params(), 50, 40)
    assert params_validate(Params(n_cell=2000), 50, 40) == []


def test_param_names_cover_table():
    names = set(param_names())
    assert {"W_I", "C_w", "T_FFI", "T_de", "T_s", "n_cell", "n_sp", "C_1", "C_2"} <= names


@given(st.floats(-1e6, 0.0))
def test_any_nonpositive_threshold_is_invalid(v):
    assert params_validate(Params(T_de=v))


class TestFrame:
    def test_rejects_tiny_frames(self):
        with pytest.raises(ValueError):
            Frame(np.zeros((4, 10), dtype=np.uint8))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            Frame(np.full((8, 8), 256))
        with pytest.raises(ValueError):
            Frame(np.full((8, 8), -1))

    def test_is_read_only(self):
        f = Frame.uniform(3)
        with pytest.raises(ValueError):
            f.luminance[0, 0] = 9

    def test_shape_and_equality(self):
        f = Frame.uniform(7, 10, 6)
        assert (f.width, f.height, f.shape) == (10, 6, (6, 10))
        assert f == Frame(np.full((6, 10), 7))
        assert f != Frame.uniform(8, 10, 6)


class TestLayerState:
    def test_initial_state_is_empty(self):
        s = LayerState.initial(params_default())
        assert s.prev_luminance is None
        assert s.prev_p.shape == (FRAME_HEIGHT, FRAME_WIDTH)
        assert not s.prev_p.any()
        assert s.spike_window == () and s.capacity == 5

    def test_rejects_wrong_prev_p_shape(self):
        with pytest.raises(ValueError):
            LayerState(width=10, height=8, prev_p=np.zeros((9, 10)))

    def test_rejects_overfull_window(self):
        with pytest.raises(ValueError):
            LayerState(capacity=2, spike_window=(True, True, False))
