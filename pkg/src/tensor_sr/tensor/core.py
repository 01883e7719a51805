"""
Order-3 tensors and the t-product algebra.

A Tensor3 of dimensions n1 x n2 x n3 is stored as its stack of frontal
slices, i.e. a float64 array of shape (n3, n1, n2). The t-product multiplies
tubes by circular convolution along the third dimension; it is computed by a
DFT along that dimension, one matrix product per frequency and the inverse
DFT. A naive block-circulant path is kept as a reference implementation.
"""

from typing import Tuple, Union

import numpy as np
import scipy.fft

from ..helper.exception import (TensorShapeError, IndexRangeError,
                                CorruptedSpectrumError)
from ..helper.threads import fft_workers

TYPE_DIMS = Tuple[int, int, int]

# Imaginary residue of an inverse transform above this is an error
IMAG_ERROR = 1e-8


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


class Tensor3:
    """
    An immutable dense order-3 real tensor
    """

    __slots__ = ("_slices",)

    def __init__(self, array, check: bool = True):
        """
          :param array: array-like of shape (n1, n2, n3)
          :param check: verify that all entries are finite
        """
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim != 3:
            raise TensorShapeError("a Tensor3 needs 3 dimensions, got shape {}",
                                   arr.shape)
        self._slices = self._validate(np.moveaxis(arr, 2, 0), check)

    @classmethod
    def from_slices(cls, slices: np.ndarray, check: bool = True) -> "Tensor3":
        """
        Build a tensor from its frontal slices, an array of shape (n3, n1, n2)
        """
        obj = cls.__new__(cls)
        obj._slices = cls._validate(np.asarray(slices, dtype=np.float64), check)
        return obj

    @staticmethod
    def _validate(slices: np.ndarray, check: bool) -> np.ndarray:
        if slices.ndim != 3 or 0 in slices.shape:
            raise TensorShapeError("invalid tensor slices shape: {}", slices.shape)
        if check and not np.isfinite(slices).all():
            raise TensorShapeError("tensor contains non-finite values")
        return _readonly(np.array(slices, dtype=np.float64, order="C"))

    @property
    def dims(self) -> TYPE_DIMS:
        n3, n1, n2 = self._slices.shape
        return n1, n2, n3

    @property
    def slices(self) -> np.ndarray:
        """The frontal slices, shape (n3, n1, n2), read-only"""
        return self._slices

    @property
    def array(self) -> np.ndarray:
        """A read-only (n1, n2, n3) view"""
        return np.moveaxis(self._slices, 0, 2)

    def frontal(self, k: int) -> np.ndarray:
        return self._slices[k]

    def lateral(self, j: int) -> np.ndarray:
        """Lateral slice (:, j, :) as an (n1, n3) matrix"""
        return self._slices[:, :, j].T

    def __repr__(self) -> str:
        return "<Tensor3 {}x{}x{}>".format(*self.dims)

    def _other(self, other: "Tensor3") -> np.ndarray:
        if not isinstance(other, Tensor3):
            raise TensorShapeError("cannot combine a Tensor3 with {}", type(other))
        if other.dims != self.dims:
            raise TensorShapeError("shape mismatch: {} vs {}", self.dims,
                                   other.dims)
        return other._slices

    def __add__(self, other: "Tensor3") -> "Tensor3":
        return Tensor3.from_slices(self._slices + self._other(other))

    def __sub__(self, other: "Tensor3") -> "Tensor3":
        return Tensor3.from_slices(self._slices - self._other(other))

    def __neg__(self) -> "Tensor3":
        return Tensor3.from_slices(-self._slices, check=False)

    def __mul__(self, scalar: float) -> "Tensor3":
        if isinstance(scalar, Tensor3):
            return NotImplemented
        return Tensor3.from_slices(self._slices * float(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other: "Tensor3") -> "Tensor3":
        return tproduct(self, other)


class SpectralTensor:
    """
    The DFT of a Tensor3 along its third dimension: n3 complex n1 x n2
    matrices, slice b being the b-th frequency
    """

    __slots__ = ("_slices",)

    def __init__(self, slices: np.ndarray):
        """
          :param slices: complex array of shape (n3, n1, n2)
        """
        arr = np.asarray(slices, dtype=np.complex128)
        if arr.ndim != 3:
            raise TensorShapeError("invalid spectral slices shape: {}", arr.shape)
        self._slices = _readonly(np.array(arr, order="C"))

    @property
    def dims(self) -> TYPE_DIMS:
        n3, n1, n2 = self._slices.shape
        return n1, n2, n3

    @property
    def slices(self) -> np.ndarray:
        return self._slices

    def slice(self, b: int) -> np.ndarray:
        return self._slices[b]

    def __repr__(self) -> str:
        return "<SpectralTensor {}x{}x{}>".format(*self.dims)


# -------------------------------------------------------------------------

def spectrum(slices: np.ndarray) -> np.ndarray:
    """Unnormalized forward DFT of a slice stack along the slice axis"""
    return scipy.fft.fft(slices, axis=0, workers=fft_workers())


def inverse_spectrum(spec: np.ndarray) -> np.ndarray:
    """
    Inverse DFT along the slice axis, returning the real part. Imaginary
    residue above IMAG_ERROR signals a spectrum that is not conjugate-symmetric
    """
    out = scipy.fft.ifft(spec, axis=0, workers=fft_workers())
    residue = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if residue > IMAG_ERROR:
        raise CorruptedSpectrumError("inverse transform has imaginary residue {:.3g}",
                                     residue)
    return np.ascontiguousarray(out.real)


def fft3(a: Tensor3) -> SpectralTensor:
    return SpectralTensor(spectrum(a.slices))


def ifft3(s: SpectralTensor) -> Tensor3:
    return Tensor3.from_slices(inverse_spectrum(s.slices))


# -------------------------------------------------------------------------

def zeros(n1: int, n2: int, n3: int) -> Tensor3:
    return Tensor3.from_slices(np.zeros((n3, n1, n2)), check=False)


def identity_tensor(n: int, n3: int) -> Tensor3:
    """Frontal slice 0 is the n x n identity, all the others are zero"""
    slices = np.zeros((n3, n, n))
    slices[0] = np.eye(n)
    return Tensor3.from_slices(slices, check=False)


def random_tensor(n1: int, n2: int, n3: int,
                  rng: Union[int, np.random.Generator] = None) -> Tensor3:
    """Standard normal entries"""
    rng = np.random.default_rng(rng)
    return Tensor3(rng.standard_normal((n1, n2, n3)))


def _check_product(a: Tensor3, b: Tensor3):
    n1, n2, n3 = a.dims
    m1, _, m3 = b.dims
    if n2 != m1 or n3 != m3:
        raise TensorShapeError("cannot t-multiply tensors of shape {} and {}",
                               a.dims, b.dims)


def circulant_unfold(a: Tensor3) -> np.ndarray:
    """
    Block-circulant matrix of shape (n1*n3, n2*n3); block (r, c) is frontal
    slice (r - c) mod n3
    """
    n1, n2, n3 = a.dims
    out = np.empty((n1 * n3, n2 * n3))
    for r in range(n3):
        for c in range(n3):
            out[r*n1:(r+1)*n1, c*n2:(c+1)*n2] = a.slices[(r - c) % n3]
    return out


def tproduct(a: Tensor3, b: Tensor3, method: str = "fft") -> Tensor3:
    """
    The t-product a * b of an n1 x n2 x n3 and an n2 x n4 x n3 tensor
      :param method: "fft" (per-frequency products) or "circulant" (the naive
         block-circulant matrix product, a reference path)
    """
    _check_product(a, b)
    n1, _, n3 = a.dims
    n4 = b.dims[1]
    if method == "fft":
        prod = spectrum(a.slices) @ spectrum(b.slices)
        return Tensor3.from_slices(inverse_spectrum(prod))
    elif method == "circulant":
        stacked = circulant_unfold(a) @ b.slices.reshape(-1, n4)
        return Tensor3.from_slices(stacked.reshape(n3, n1, n4))
    raise TensorShapeError("unknown t-product method: {}", method)


def ttranspose(a: Tensor3) -> Tensor3:
    """
    Tensor transpose: frontal slices transposed, slices 1..n3-1 in reverse
    order. Its spectral slices are the conjugate transposes of those of a
    """
    n3 = a.dims[2]
    order = [(-k) % n3 for k in range(n3)]
    return Tensor3.from_slices(a.slices[order].transpose(0, 2, 1), check=False)


# -------------------------------------------------------------------------

def frob_norm(a: Tensor3) -> float:
    return float(np.linalg.norm(a.slices.ravel()))


def l1_norm(a: Tensor3) -> float:
    return float(np.abs(a.slices).sum())


def slice_norm_sq(a: Tensor3, j: int) -> float:
    """Squared Frobenius norm of the lateral slice (:, j, :)"""
    n2 = a.dims[1]
    if not 0 <= j < n2:
        raise IndexRangeError("lateral slice index {} out of range [0, {})", j, n2)
    return float(np.sum(a.slices[:, :, j]**2))


def atom_norms_sq(a: Tensor3) -> np.ndarray:
    """Squared Frobenius norms of all lateral slices"""
    return np.sum(a.slices**2, axis=(0, 1))
