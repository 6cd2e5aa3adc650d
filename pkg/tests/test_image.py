"""Test module for the image representation, codec and filtering"""

import numpy as np

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from hypothesis.extra.numpy import arrays

from pyvcr.image import (
    Image,
    filter_array,
    gaussian_filter,
    gaussian_kernel,
    load_image,
    save_image,
    to_luminance,
    to_storage,
)


def dense_correlate(array, taps, mode):
    """Straight loops over the full 2D kernel, the oracle for filter_array()"""
    kernel = np.outer(taps, taps)
    radius = len(taps) // 2
    if mode == "reflect":
        array = np.pad(array, radius, mode="symmetric")
    height = array.shape[0] - 2 * radius
    width = array.shape[1] - 2 * radius
    out = np.zeros((height, width))
    for row in range(height):
        for col in range(width):
            window = array[row : row + len(taps), col : col + len(taps)]
            out[row, col] = np.sum(window * kernel)
    return out


def test_load_ppm(tmpdir):
    """A hand-written binary PPM decodes to the exact pixels"""
    ppm = tmpdir / "tiny.ppm"
    pixels = bytes([0, 0, 0, 255, 255, 255, 255, 0, 0, 0, 255, 0])
    ppm.write_binary(b"P6\n2 2\n255\n" + pixels)
    img = load_image(str(ppm))
    assert (img.width, img.height, img.channels) == (2, 2, 3)
    assert img.pixels.dtype == np.uint8
    assert img.pixels[0, 0].tolist() == [0, 0, 0]
    assert img.pixels[0, 1].tolist() == [255, 255, 255]
    assert img.pixels[1, 0].tolist() == [255, 0, 0]
    assert img.pixels[1, 1].tolist() == [0, 255, 0]


def test_load_pgm_with_comment(tmpdir):
    """Comments in the PNM header are allowed"""
    pgm = tmpdir / "tiny.pgm"
    pgm.write_binary(b"P5\n# made by hand\n3 1\n255\n" + bytes([0, 128, 255]))
    img = load_image(pgm)
    assert img.channels == 1
    assert img.pixels.tolist() == [[0, 128, 255]]


@pytest.mark.parametrize(
    "content, message",
    [
        (b"P6\n2 2\n", "Corrupt stream"),
        (b"P6\n2 2\n255\n" + bytes(5), "Corrupt stream"),
        (b"\x89PNG\r\n\x1a\n" + bytes(10), "Corrupt stream"),
        (b"P5\n2 2\n65535\n" + bytes(8), "16-bit"),
        (b"\xff\xd8\xff\xe0 a jpeg", "Unsupported"),
        (b"P3\n1 1\n255\n0 0 0\n", "Unsupported"),
    ],
)
def test_load_errors(tmpdir, content, message):
    """Broken, 16-bit and foreign files are rejected"""
    path = tmpdir / "broken.img"
    path.write_binary(content)
    with pytest.raises(ValueError, match=message):
        load_image(path)


def test_load_missing_file(tmpdir):
    """Missing files give IOError"""
    with pytest.raises(IOError):
        load_image(tmpdir / "nothere.png")


@pytest.mark.parametrize(
    "suffix, channels", [(".png", 1), (".png", 3), (".pgm", 1), (".ppm", 3)]
)
def test_save_load(tmpdir, suffix, channels):
    """Codec round trip is bit exact"""
    rng = np.random.default_rng(1)
    shape = (13, 17) if channels == 1 else (13, 17, 3)
    img = Image(rng.integers(0, 256, size=shape, dtype=np.uint8))
    path = tmpdir / ("img" + suffix)
    save_image(img, path)
    assert load_image(path) == img


def test_save_float_image(tmpdir):
    """Float images are stored rounded"""
    img = Image(np.array([[0.4, 0.5], [254.5, 300.0]]))
    save_image(img, tmpdir / "float.png")
    assert load_image(tmpdir / "float.png").pixels.tolist() == [[0, 1], [255, 255]]


def test_save_errors(tmpdir):
    """Format dispatch and I/O failures"""
    gray = Image(np.zeros((4, 4), dtype=np.uint8))
    rgb = Image(np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(ValueError):
        save_image(gray, tmpdir / "gray.ppm")
    with pytest.raises(ValueError):
        save_image(rgb, tmpdir / "rgb.pgm")
    with pytest.raises(ValueError):
        save_image(rgb, tmpdir / "rgb.jpg")
    with pytest.raises(OSError):
        save_image(rgb, tmpdir / "no" / "such" / "dir" / "rgb.png")


def test_image_validation():
    """Shapes other than (h, w) and (h, w, 3) are rejected"""
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4, 2)))
    with pytest.raises(ValueError):
        Image(np.zeros((0, 4)))
    with pytest.raises(ValueError):
        Image(np.zeros(5))
    assert Image(np.zeros((4, 5, 1))).channels == 1

    source = np.zeros((4, 4))
    img = Image(source)
    source[0, 0] = 1
    assert img.pixels[0, 0] == 0
    assert not img.pixels.flags.writeable
    assert img.as_float().flags.writeable


def test_to_storage():
    """Rounding half away from zero, clamped"""
    values = np.array([-3.0, 0.49, 0.5, 1.5, 2.5, 254.5, 255.2, 1000.0])
    assert to_storage(values).tolist() == [0, 0, 1, 2, 3, 255, 255, 255]
    assert to_storage(values).dtype == np.uint8


def test_to_luminance():
    """BT.601 weights"""
    white = Image(np.full((2, 2, 3), 255, dtype=np.uint8))
    assert np.allclose(to_luminance(white).pixels, 255.0)
    red = Image(np.array([[[255, 0, 0]]], dtype=np.uint8))
    assert to_luminance(red).pixels[0, 0] == pytest.approx(76.245, abs=1e-9)
    gray = Image(np.arange(16, dtype=np.uint8).reshape(4, 4))
    assert to_luminance(gray) == gray
    assert to_luminance(red).channels == 1


@pytest.mark.parametrize("sigma, kernel_len", [(0.5, 3), (1.5, 7), (3.4, 17)])
def test_gaussian_kernel(sigma, kernel_len):
    """Taps are normalized and symmetric"""
    taps = gaussian_kernel(sigma, kernel_len)
    assert len(taps) == kernel_len
    assert abs(taps.sum() - 1) < 1e-12
    assert np.allclose(taps, taps[::-1])
    assert taps.argmax() == kernel_len // 2


def test_gaussian_kernel_errors():
    """Even lengths and non-positive sigma are rejected"""
    with pytest.raises(ValueError):
        gaussian_kernel(1.0, 4)
    with pytest.raises(ValueError):
        gaussian_kernel(1.0, 0)
    with pytest.raises(ValueError):
        gaussian_kernel(0.0, 5)


def test_filter_constant():
    """A constant image stays constant in both modes"""
    img = Image(np.full((12, 10), 77.0))
    for mode, shape in [("reflect", (12, 10)), ("valid", (6, 4))]:
        out = gaussian_filter(img, 1.4, 7, mode=mode)
        assert out.pixels.shape == shape
        assert np.allclose(out.pixels, 77.0, atol=1e-9)


def test_filter_impulse():
    """The response to a unit impulse is the 2D kernel"""
    impulse = np.zeros((21, 21))
    impulse[10, 10] = 1.0
    taps = gaussian_kernel(1.5, 7)
    out = filter_array(impulse, taps, mode="reflect")
    assert abs(out.sum() - 1) < 1e-9
    assert np.allclose(out[7:14, 7:14], np.outer(taps, taps), atol=1e-15)


@settings(deadline=None, max_examples=30)
@given(arrays(np.float64, (16, 16), elements=st.floats(0, 255)))
def test_filter_dense_oracle(array):
    """Separable filtering equals the dense 2D correlation"""
    taps = gaussian_kernel(1.1, 5)
    for mode in ["reflect", "valid"]:
        assert np.allclose(
            filter_array(array, taps, mode=mode),
            dense_correlate(array, taps, mode),
            atol=1e-9,
            rtol=0,
        )


def test_filter_channels():
    """Three channel images are filtered per channel"""
    rng = np.random.default_rng(3)
    array = rng.random((9, 9, 3))
    taps = gaussian_kernel(1.0, 3)
    out = filter_array(array, taps, mode="valid")
    assert out.shape == (7, 7, 3)
    for channel in range(3):
        expected = filter_array(array[:, :, channel], taps, mode="valid")
        assert np.allclose(out[:, :, channel], expected)


def test_filter_errors():
    """Too large kernels in valid mode, unknown modes"""
    with pytest.raises(ValueError, match="larger than image"):
        filter_array(np.zeros((4, 10)), gaussian_kernel(1, 5), mode="valid")
    with pytest.raises(ValueError):
        filter_array(np.zeros((10, 10)), gaussian_kernel(1, 5), mode="wrap")
