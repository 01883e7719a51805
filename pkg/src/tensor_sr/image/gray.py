"""
Grayscale images with intensities in [0, 1], their file I/O (8-bit PNG and
binary PGM) and resampling
"""

from pathlib import Path

from typing import Union

import numpy as np
from PIL import Image

from pii_data.helper.io import base_extension

from ..helper.exception import GeometryError, ImageFormatError

TYPE_PATH = Union[str, Path]

FORMATS = {".png": "PNG", ".pgm": "PPM"}

# Luminance weights for color inputs
LUMA = np.array([0.299, 0.587, 0.114])

# Catmull-Rom parameter of the bicubic kernel
CUBIC_A = -0.5


class GrayImage:
    """
    An immutable grayscale image; pixels are indexed as [row, column]
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels):
        arr = np.array(pixels, dtype=np.float64)
        if arr.ndim != 2 or 0 in arr.shape:
            raise GeometryError("invalid image shape: {}", arr.shape)
        if not np.isfinite(arr).all() or arr.min() < 0 or arr.max() > 1:
            raise ImageFormatError("image intensities must lie in [0, 1]")
        arr.flags.writeable = False
        self._pixels = arr

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def shape(self):
        return self._pixels.shape

    def __repr__(self) -> str:
        return "<GrayImage {}x{}>".format(*self.shape)

    def __eq__(self, other) -> bool:
        return isinstance(other, GrayImage) and \
            np.array_equal(self._pixels, other._pixels)

    @classmethod
    def load(cls, filename: TYPE_PATH) -> "GrayImage":
        """
        Read a PNG or PGM file. Color images are reduced to their luminance
        """
        _check_format(filename)
        with Image.open(filename) as img:
            if img.mode == "L":
                arr = np.asarray(img, dtype=np.float64)
            elif img.mode in ("1", "P", "LA", "RGB", "RGBA"):
                rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
                arr = rgb @ LUMA
            else:
                raise ImageFormatError("unsupported image mode '{}' in {}",
                                       img.mode, filename)
        return cls(np.clip(arr / 255.0, 0.0, 1.0))

    def save(self, filename: TYPE_PATH):
        """
        Write the image as an 8-bit PNG or binary PGM file
        """
        fmt = _check_format(filename)
        data = np.round(self._pixels * 255.0).astype(np.uint8)
        Image.fromarray(data).save(filename, format=fmt)


def _check_format(filename: TYPE_PATH) -> str:
    ext = base_extension(str(filename)).lower()
    try:
        return FORMATS[ext]
    except KeyError:
        raise ImageFormatError("unsupported image format for: {}", filename)


# -------------------------------------------------------------------------


def crop_to_multiple(img: GrayImage, c: int) -> GrayImage:
    """
    Crop the bottom/right borders so that both dimensions are multiples of c
    """
    p, q = img.shape
    if p < c or q < c:
        raise GeometryError("image {}x{} smaller than the downsampling rate {}",
                            p, q, c)
    return GrayImage(img.pixels[:p - p % c, :q - q % c])


def downsample(img: GrayImage, c: int) -> GrayImage:
    """
    Reduce by a factor c; each output pixel is the mean of a c x c block
    """
    p, q = img.shape
    if p % c or q % c:
        raise GeometryError("image dims {}x{} are not divisible by {}", p, q, c)
    blocks = img.pixels.reshape(p // c, c, q // c, c)
    return GrayImage(blocks.mean(axis=(1, 3)))


def _cubic(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    a = CUBIC_A
    inner = (a + 2) * ax**3 - (a + 3) * ax**2 + 1
    outer = a * ax**3 - 5 * a * ax**2 + 8 * a * ax - 4 * a
    return np.where(ax <= 1, inner, np.where(ax < 2, outer, 0.0))


def _resize_matrix(n_in: int, c: int) -> np.ndarray:
    """
    Interpolation matrix (c*n_in, n_in) for bicubic resampling along one
    axis, with edge replication
    """
    n_out = n_in * c
    src = (np.arange(n_out) + 0.5) / c - 0.5
    base = np.floor(src).astype(int)
    rows = np.arange(n_out)
    weights = np.zeros((n_out, n_in))
    for offset in (-1, 0, 1, 2):
        idx = base + offset
        np.add.at(weights, (rows, np.clip(idx, 0, n_in - 1)), _cubic(src - idx))
    return weights


def upsample(img: GrayImage, c: int) -> GrayImage:
    """
    Enlarge by a factor c with bicubic (Catmull-Rom) interpolation
    """
    p, q = img.shape
    out = _resize_matrix(p, c) @ img.pixels @ _resize_matrix(q, c).T
    return GrayImage(np.clip(out, 0.0, 1.0))


# -------------------------------------------------------------------------

PSNR_CAP = 100.0


def _check_same(a: GrayImage, b: GrayImage):
    if a.shape != b.shape:
        raise GeometryError("image size mismatch: {} vs {}", a.shape, b.shape)


def psnr(a: GrayImage, b: GrayImage) -> float:
    """
    Peak signal-to-noise ratio in dB for a peak value of 1, capped at 100 dB
    """
    _check_same(a, b)
    mse = float(np.mean((a.pixels - b.pixels)**2))
    if mse == 0:
        return PSNR_CAP
    return float(min(PSNR_CAP, 10.0 * np.log10(1.0 / mse)))


def mean_abs_error(a: GrayImage, b: GrayImage) -> float:
    _check_same(a, b)
    return float(np.mean(np.abs(a.pixels - b.pixels)))
