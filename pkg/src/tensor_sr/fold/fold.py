"""
Conversion between images and tensor blocks.

An image p x q becomes a p x q x r tensor by stacking r shifted copies of it.
"Folding" samples a x a x a cubes from such tensors and reshapes each cube
into a d x n slab (d = a*a, n = a), so that N cubes give a d x N x n block.
Inside a slab, pixel (i, j, k) of the cube (row, column, depth) goes to row
i + a*j and tube position k. "Unfolding" scatters the cubes back, averaging
overlapping contributions.
"""

from dataclasses import dataclass

from typing import Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.ndimage import correlate1d

from ..helper.exception import GeometryError, CoverageError, TensorShapeError
from ..tensor import Tensor3
from ..image import GrayImage
from .config import FoldConfig

TYPE_DIMS = Tuple[int, int, int]

# Derivative filters for low-resolution features
F1 = np.array([-1.0, 0.0, 1.0])
F2 = np.array([1.0, 0.0, -2.0, 0.0, 1.0])

# (filter, axis of the slice stack) for the 6 features: x is the column
# axis, y the row axis, z the shift axis
FEATURE_FILTERS = ((F1, 2), (F1, 1), (F2, 2), (F2, 1), (F1, 0), (F2, 0))


@dataclass(frozen=True, eq=False)
class TensorBlock:
    """
    A d x N x n block plus, for each sample column, the origin of its cube
    as an (image, row, col, depth) row of `origins`
    """
    block: Tensor3
    origins: np.ndarray

    def __post_init__(self):
        if len(self.origins) != self.block.dims[1]:
            raise TensorShapeError("block has {} samples but {} origins",
                                   self.block.dims[1], len(self.origins))

    @property
    def num_samples(self) -> int:
        return self.block.dims[1]


def shift_concat(img: GrayImage, cfg: FoldConfig) -> Tensor3:
    """
    Stack the r shifted copies of an image into a p x q x r tensor; borders
    are filled by replicating edge pixels
    """
    pix = img.pixels
    p, q = pix.shape
    rows = np.arange(p)
    cols = np.arange(q)
    slices = [pix[np.clip(rows - dy, 0, p - 1)][:, np.clip(cols - dx, 0, q - 1)]
              for dx, dy in cfg.shifts]
    return Tensor3.from_slices(np.stack(slices))


def extract_features(x: Tensor3) -> Tuple[Tensor3, ...]:
    """
    The 6 derivative feature volumes of an (upsampled) image tensor: first
    and second derivatives along x, along y and along the shift axis z
    """
    return tuple(Tensor3.from_slices(correlate1d(x.slices, f, axis=axis,
                                                 mode="nearest"))
                 for f, axis in FEATURE_FILTERS)


# -------------------------------------------------------------------------


def sample_origins(shapes: Sequence[TYPE_DIMS], cfg: FoldConfig,
                   exhaustive: bool = False) -> np.ndarray:
    """
    Select cube origins over a set of p x q x r tensors, in lexicographic
    (image, row, col, depth) order
      :param shapes: dims of each tensor
      :param exhaustive: ignore the sample budget and take every cube
      :return: an (N, 4) integer array
    """
    a = cfg.a
    parts = []
    for num, (p, q, r) in enumerate(shapes):
        if p < a or q < a or r < a:
            raise GeometryError("tensor {}x{}x{} is smaller than the cube size {}",
                                p, q, r, a)
        grid = np.meshgrid(np.arange(p - a + 1), np.arange(q - a + 1),
                           np.arange(r - a + 1), indexing="ij")
        coords = np.stack([g.ravel() for g in grid], axis=1)
        parts.append(np.column_stack([np.full(len(coords), num), coords]))
    if not parts:
        raise GeometryError("no tensors to sample from")
    origins = np.concatenate(parts)

    budget = cfg.sample_budget
    if not exhaustive and 0 < budget < len(origins):
        rng = np.random.default_rng(cfg.seed)
        keep = np.sort(rng.choice(len(origins), size=budget, replace=False))
        origins = origins[keep]
    return origins


def fold(volumes: Union[Tensor3, Sequence[Tensor3]], cfg: FoldConfig,
         origins: np.ndarray = None) -> TensorBlock:
    """
    Sample a x a x a cubes from one or more p x q x r tensors and reshape
    them into a d x N x n block
      :param volumes: the tensors, indexed by the image column of `origins`
      :param origins: cube origins; by default they are selected with
        sample_origins()
    """
    vols = [volumes] if isinstance(volumes, Tensor3) else list(volumes)
    if origins is None:
        origins = sample_origins([v.dims for v in vols], cfg)
    a = cfg.a
    out = np.empty((a, a * a, len(origins)))
    for num, vol in enumerate(vols):
        sel = origins[:, 0] == num
        if not sel.any():
            continue
        org = origins[sel]
        # window axes: (depth0, row0, col0, k, i, j)
        win = sliding_window_view(vol.slices, (a, a, a))
        cubes = win[org[:, 3], org[:, 1], org[:, 2]]
        out[:, :, sel] = cubes.transpose(1, 3, 2, 0).reshape(a, a * a, -1)
    return TensorBlock(Tensor3.from_slices(out, check=False), origins)


def fold_features(features: Sequence[Sequence[Tensor3]], cfg: FoldConfig,
                  origins: np.ndarray) -> TensorBlock:
    """
    Fold the feature volumes of a set of images and stack the per-feature
    blocks along the first dimension, giving a 6d x N x n block
      :param features: for each image, its 6 feature volumes
    """
    blocks = [fold([f[num] for f in features], cfg, origins).block.slices
              for num in range(len(FEATURE_FILTERS))]
    return TensorBlock(Tensor3.from_slices(np.concatenate(blocks, axis=1),
                                           check=False), origins)


def unfold(t: TensorBlock, dims: TYPE_DIMS, fallback: Tensor3 = None,
           image: int = 0) -> Tensor3:
    """
    Scatter the cubes of a block back into a p x q x r tensor. Pixels
    covered by several cubes get the mean of their contributions
      :param dims: (p, q, r) of the output
      :param fallback: p x q x r tensor providing the pixels no cube covers
      :param image: which image of the block to rebuild
    """
    d, _, n = t.block.dims
    a = n
    if d != a * a:
        raise TensorShapeError("cannot unfold a block with d={} and n={}", d, n)
    p, q, r = dims
    sel = t.origins[:, 0] == image
    org = t.origins[sel]
    cubes = t.block.slices[:, :, sel].reshape(a, a, a, -1)    # (k, j, i, s)

    mean = np.zeros((r, p, q))
    count = np.zeros((r, p, q), dtype=np.int64)
    # An incremental mean is exact when all contributions to a pixel agree.
    # Origins are distinct, so one cube offset never hits a pixel twice
    for k in range(a):
        for j in range(a):
            for i in range(a):
                pos = (org[:, 3] + k, org[:, 1] + i, org[:, 2] + j)
                count[pos] += 1
                mean[pos] += (cubes[k, j, i] - mean[pos]) / count[pos]

    hole = count == 0
    if hole.any():
        if fallback is None:
            raise CoverageError("{} pixels not covered by any cube", int(hole.sum()))
        if fallback.dims != (p, q, r):
            raise TensorShapeError("fallback dims {} differ from {}",
                                   fallback.dims, dims)
        mean[hole] = fallback.slices[hole]
    return Tensor3.from_slices(mean)


# -------------------------------------------------------------------------


def cube_means(t: TensorBlock) -> np.ndarray:
    """Mean of every sampled cube, an array of N values"""
    return t.block.slices.mean(axis=(0, 1))


def remove_cube_means(t: TensorBlock) -> Tuple[TensorBlock, np.ndarray]:
    """Subtract from every cube its own mean"""
    means = cube_means(t)
    return TensorBlock(Tensor3.from_slices(t.block.slices - means), t.origins), means


def add_cube_means(block: Tensor3, means: np.ndarray) -> Tensor3:
    """Add a per-sample offset to every column of a block"""
    return Tensor3.from_slices(block.slices + means)
