import numpy as np
import pytest

from smoothverify import wire


def test_grid_round_trip():
    u = np.array([0.0, 0.123, 0.5, 0.999, 1.0])
    idx = wire.quantize(u, 0.25)
    back = wire.dequantize(idx, 0.25)
    assert np.all(np.abs(back - u) <= 0.25 / 128 + 1e-15)
    assert np.all(back >= 0.0) and np.all(back <= 1.0)
    # grid points survive exactly
    assert np.array_equal(wire.quantize(back, 0.25), idx)


def test_entry_width_for_quarter_eps():
    # step 1/256 gives indices 0..256: nine bits, two bytes on the wire
    assert wire.grid_max_index(0.25) == 256
    assert wire.entry_bits(0.25) == 9
    assert wire.entry_width(0.25) == 2


def test_encode_decode_indices():
    idx = np.array([0, 1, 255, 256])
    blob = wire.encode_indices(idx, 0.25)
    assert len(blob) == 8
    assert np.array_equal(wire.decode_indices(blob, 4, 0.25), idx)
    with pytest.raises(ValueError):
        wire.decode_indices(blob, 5, 0.25)


def test_float_and_frame_encoding():
    vals = [0.125, 1.0, 0.3]
    assert np.array_equal(wire.decode_floats(wire.encode_floats(vals), 3), np.array(vals))
    framed = wire.frame(b"abc")
    assert framed == b"\x00\x00\x00\x03abc"
    assert wire.decode_uint32(wire.encode_uint32(7)) == 7


def test_quantization_error_bounded_by_half_step():
    gen = np.random.default_rng(1)
    for eps in (0.25, 0.2, 0.1, 0.03):
        u = gen.random(500)
        err = np.abs(wire.snap(u, eps) - u)
        assert err.max() <= wire.grid_step(eps) / 2 + 1e-12
