import numpy as np
import pytest

from flowscope.images import (
    ImageFormatError,
    luminance_bytes,
    read_pgm,
    read_ppm,
    write_pgm,
    write_ppm,
)


def test_luminance_quantization():
    lum = np.array([[0.0, 0.5, 1.0, 0.999, 2.0, -1.0]])
    out = luminance_bytes(lum)
    assert out.dtype == np.uint8
    assert out.tolist() == [[0, 128, 255, 255, 255, 0]]


def test_pgm_round_trip():
    rng = np.random.default_rng(5)
    pixels = rng.integers(0, 256, size=(13, 7), dtype=np.uint8)
    data = write_pgm(pixels)
    assert data.startswith(b"P5\n7 13\n255\n")
    assert np.array_equal(read_pgm(data), pixels)


def test_ppm_round_trip():
    rng = np.random.default_rng(6)
    pixels = rng.integers(0, 256, size=(4, 9, 3), dtype=np.uint8)
    data = write_ppm(pixels)
    assert data.startswith(b"P6\n9 4\n255\n")
    assert np.array_equal(read_ppm(data), pixels)


def test_header_comments_accepted():
    pixels = np.arange(6, dtype=np.uint8).reshape(2, 3)
    raw = write_pgm(pixels)
    commented = raw.replace(b"P5\n", b"P5\n# made by hand\n", 1)
    assert np.array_equal(read_pgm(commented), pixels)


def test_wrong_magic():
    with pytest.raises(ImageFormatError):
        read_pgm(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(ImageFormatError):
        read_ppm(b"P5\n1 1\n255\n\x00")


def test_truncated_payload():
    ok = write_pgm(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ImageFormatError):
        read_pgm(ok[:-1])
    ok3 = write_ppm(np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ImageFormatError):
        read_ppm(ok3[:-2])


def test_nonstandard_maxval_rejected():
    with pytest.raises(ImageFormatError):
        read_pgm(b"P5\n1 1\n65535\n\x00\x00")


def test_write_shapes_checked():
    with pytest.raises(ValueError):
        write_pgm(np.zeros((2, 2, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        write_ppm(np.zeros((2, 2), dtype=np.uint8))
