"""
Generation phase: super-resolve a low-resolution image with a trained model
"""

from dataclasses import dataclass
from pathlib import Path

from typing import Iterator, Tuple

import numpy as np

from pii_data.helper.logger import PiiLogger

from ..helper.exception import GeometryError, ModelFormatError
from ..tensor import Tensor3, tproduct, zeros
from ..image import GrayImage, upsample
from ..fold import (TensorBlock, shift_concat, extract_features, sample_origins,
                    fold, fold_features, unfold, cube_means, add_cube_means)
from ..sparse import SparseCodeConfig, fista
from ..dictionary import unstack_dictionary
from ..writer import SRModel
from .source import LowResSource


@dataclass(frozen=True, eq=False)
class _Prepared:
    volume: Tensor3
    features: TensorBlock
    means: np.ndarray


def _prepare(model: SRModel, low: GrayImage) -> _Prepared:
    """
    Upsample, build the shifted-copies tensor and fold its features over
    every cube position
    """
    cfg = model.fold
    need = -(-cfg.a // cfg.c)
    p, q = low.shape
    if p < need or q < need:
        raise GeometryError("low-resolution image too small: expected at least {}x{}, got {}x{}",
                            need, need, p, q)
    vol = shift_concat(upsample(low, cfg.c), cfg)
    origins = sample_origins([vol.dims], cfg, exhaustive=True)
    feats = fold_features([extract_features(vol)], cfg, origins)
    return _Prepared(vol, feats, cube_means(fold(vol, cfg, origins)))


def _rebuild(prep: _Prepared, block: Tensor3) -> GrayImage:
    """
    Add back the cube means, unfold and take the unshifted slice
    """
    full = TensorBlock(add_cube_means(block, prep.means), prep.features.origins)
    out = unfold(full, prep.volume.dims)
    return GrayImage(np.clip(out.frontal(0), 0.0, 1.0))


def generation_config(model: SRModel, lam: float = None) -> SparseCodeConfig:
    """
    Sparse coding parameters for the generation phase: those used in
    training, with an optional override of lambda
    """
    meta = model.meta
    defaults = SparseCodeConfig()
    return SparseCodeConfig(lam=meta.lam if lam is None else lam,
                            max_iter=meta.inner_iter or defaults.max_iter,
                            tol=meta.tol or defaults.tol)


def generation_dictionaries(model: SRModel) -> Tuple[Tensor3, Tensor3]:
    """
    The dictionary pair at data scale: the stored stacked-scale atoms
    multiplied by sqrt(N), N being the number of training samples
    """
    num = model.meta.num_samples
    if num < 1:
        raise ModelFormatError("model has no training sample count (missing metadata sidecar)")
    return unstack_dictionary(model.pair.stacked(), model.dims[0], n_samples=num)


def super_resolve(model: SRModel, low: GrayImage, cfg: SparseCodeConfig = None,
                  shape: Tuple[int, int] = None, debug: bool = False) -> GrayImage:
    """
    Produce a c-times larger image: sparse-code the low-resolution features
    over dl, reconstruct with dh and the same codes. Both dictionaries are
    used at data scale
      :param model: the trained model
      :param low: the low-resolution image
      :param cfg: sparse coding parameters (default: as in training)
      :param shape: if given, the shape the input image must have
    """
    if shape and low.shape != tuple(shape):
        raise GeometryError("expected a {}x{} image, got {}x{}", *shape, *low.shape)
    log = PiiLogger(__name__, debug)
    cfg = cfg or generation_config(model)
    dh, dl = generation_dictionaries(model)
    prep = _prepare(model, low)
    log(". super-resolving %dx%d: %d cubes", *low.shape, prep.features.num_samples)
    codes = fista(dl, prep.features.block, cfg, debug=debug).coeffs
    return _rebuild(prep, tproduct(dh, codes))


def baseline(model: SRModel, low: GrayImage) -> GrayImage:
    """
    The zero-code reconstruction: bicubic upsampling reduced to its
    overlap-averaged cube means
    """
    prep = _prepare(model, low)
    d_h, _, _, n = model.dims
    return _rebuild(prep, zeros(d_h, prep.features.num_samples, n))


def super_resolve_source(model: SRModel, source: LowResSource, outdir: Path,
                         cfg: SparseCodeConfig = None,
                         debug: bool = False) -> Iterator[Tuple[str, GrayImage]]:
    """
    Super-resolve every image from a source, writing the results with the
    same names into an output directory
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, low in source:
        out = super_resolve(model, low, cfg, debug=debug)
        out.save(outdir / name)
        yield name, out
