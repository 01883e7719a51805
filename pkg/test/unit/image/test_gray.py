"""
Test grayscale images: file I/O, resampling and quality metrics
"""

import numpy as np
import pytest
from PIL import Image

from tensor_sr.helper.exception import GeometryError, ImageFormatError
from tensor_sr.image import (GrayImage, downsample, upsample, crop_to_multiple,
                             psnr, mean_abs_error)


def levels(p: int, q: int, seed: int = 0) -> GrayImage:
    """A random image with 8-bit representable intensities"""
    rng = np.random.default_rng(seed)
    return GrayImage(rng.integers(0, 256, size=(p, q)) / 255.0)


# -----------------------------------------------------------------------


def test10_constructor():
    """
    Test building images
    """
    img = GrayImage([[0.0, 0.5], [1.0, 0.25]])
    assert img.shape == (2, 2)
    assert str(img) == "<GrayImage 2x2>"
    assert not img.pixels.flags.writeable
    assert img == GrayImage(img.pixels)

    with pytest.raises(ImageFormatError):
        GrayImage([[0.0, 1.5]])
    with pytest.raises(ImageFormatError):
        GrayImage([[-0.1, 0.5]])
    with pytest.raises(GeometryError):
        GrayImage([0.0, 0.5])


def test20_downsample():
    """
    Test box-mean downsampling
    """
    got = downsample(GrayImage([[0.25, 0.25], [0.75, 0.75]]), 2)
    np.testing.assert_array_equal(got.pixels, [[0.5]])

    const = GrayImage(np.full((6, 4), 0.3))
    np.testing.assert_allclose(downsample(const, 2).pixels, np.full((3, 2), 0.3))

    checker = GrayImage(np.indices((4, 4)).sum(axis=0) % 2)
    np.testing.assert_array_equal(downsample(checker, 2).pixels, np.full((2, 2), 0.5))

    with pytest.raises(GeometryError):
        downsample(GrayImage(np.zeros((5, 4))), 2)


def test30_upsample_constant():
    """
    Test that bicubic upsampling keeps constants and multiplies dims
    """
    img = GrayImage(np.full((5, 3), 0.7))
    out = upsample(img, 2)
    assert out.shape == (10, 6)
    np.testing.assert_allclose(out.pixels, 0.7, atol=1e-12)
    assert upsample(img, 3).shape == (15, 9)
    np.testing.assert_allclose(downsample(out, 2).pixels, img.pixels, atol=1e-12)


def test31_upsample_ramp():
    """
    Test that a ramp along rows stays monotone after upsampling
    """
    ramp = np.repeat(np.linspace(0, 1, 8)[:, None], 5, axis=1)
    out = upsample(GrayImage(ramp), 2).pixels
    assert np.all(np.diff(out, axis=0) >= 0)
    assert out.min() >= 0 and out.max() <= 1


def test40_crop():
    """
    Test cropping to a multiple of the downsampling rate
    """
    img = levels(5, 7)
    got = crop_to_multiple(img, 2)
    assert got.shape == (4, 6)
    np.testing.assert_array_equal(got.pixels, img.pixels[:4, :6])
    assert crop_to_multiple(got, 2) == got
    with pytest.raises(GeometryError):
        crop_to_multiple(GrayImage([[0.5]]), 2)


def test50_psnr():
    """
    Test the quality metrics
    """
    img = levels(6, 6)
    assert psnr(img, img) == 100.0
    zero = GrayImage(np.zeros((4, 4)))
    one = GrayImage(np.ones((4, 4)))
    assert psnr(zero, one) == pytest.approx(0.0, abs=1e-12)
    assert mean_abs_error(zero, one) == 1.0

    half = GrayImage(np.full((4, 4), 0.1))
    assert psnr(zero, half) == pytest.approx(20.0)
    with pytest.raises(GeometryError):
        psnr(zero, levels(4, 5))


# -----------------------------------------------------------------------


@pytest.mark.parametrize("ext", [".png", ".pgm"])
def test60_save_load(tmp_path, ext):
    """
    Test writing and reading back an image
    """
    img = levels(7, 9, seed=3)
    name = tmp_path / ("img" + ext)
    img.save(name)
    assert GrayImage.load(name) == img


def test61_pgm_png_equal(tmp_path):
    """
    Test that PGM and PNG files with the same pixels load identically
    """
    img = levels(8, 8, seed=5)
    img.save(tmp_path / "a.png")
    img.save(tmp_path / "a.pgm")
    assert GrayImage.load(tmp_path / "a.png") == GrayImage.load(tmp_path / "a.pgm")


def test62_load_color(tmp_path):
    """
    Test the luminance conversion of color images
    """
    rgb = np.zeros((2, 2, 3), dtype=np.uint8)
    rgb[..., 0] = 255
    Image.fromarray(rgb).save(tmp_path / "red.png")
    got = GrayImage.load(tmp_path / "red.png")
    np.testing.assert_allclose(got.pixels, 0.299, atol=1e-12)


def test63_format_error(tmp_path):
    """
    Test unsupported file formats
    """
    with pytest.raises(ImageFormatError):
        levels(2, 2).save(tmp_path / "img.jpg")
    with pytest.raises(ImageFormatError):
        GrayImage.load(tmp_path / "img.bmp")
