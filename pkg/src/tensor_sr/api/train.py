"""
Training phase: from a set of high-resolution images to a dictionary pair
"""

from dataclasses import dataclass, field, replace
from pathlib import Path

from typing import List, Sequence, Tuple, Union

import numpy as np

from pii_data.helper.logger import PiiLogger

from ..helper.exception import ConfigError, GeometryError, DegenerateInputError
from ..image import GrayImage, crop_to_multiple, downsample, upsample
from ..fold import (FoldConfig, shift_concat, extract_features, sample_origins,
                    fold, fold_features, remove_cube_means)
from ..sparse import SparseCodeConfig
from ..dictionary import stack_problem, train_dictionaries
from ..writer import SRModel, dump_model

TYPE_IMAGE = Union[str, Path, GrayImage]

# RMS level below which a block holds only rounding residue
ROUNDOFF_RMS = 1e-12


@dataclass(frozen=True)
class TrainSpec:
    """
    Everything needed to train a model
      :param images: training images, as filenames or loaded images
      :param fold: folding parameters
      :param sparse: sparse coding parameters (S, lambda, tol)
      :param atoms: number of dictionary atoms (m)
      :param outer_iter: number of training iterations (T)
      :param seed: seed for all random choices; it also replaces the seed
         of the folding configuration
      :param out: if defined, the model is written to this file
    """
    images: Tuple[TYPE_IMAGE, ...]
    fold: FoldConfig = field(default_factory=FoldConfig)
    sparse: SparseCodeConfig = field(default_factory=SparseCodeConfig)
    atoms: int = 128
    outer_iter: int = 10
    seed: int = 0
    out: Path = None

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if not self.images:
            raise ConfigError("invalid training specification: no images")
        if self.atoms < 1:
            raise ConfigError("invalid training specification: m >= 1 (got {})",
                              self.atoms)
        if self.outer_iter < 0:
            raise ConfigError("invalid training specification: T >= 0 (got {})",
                              self.outer_iter)
        if self.seed < 0:
            raise ConfigError("invalid training specification: seed >= 0 (got {})",
                              self.seed)
        if self.fold.seed != self.seed:
            object.__setattr__(self, "fold", replace(self.fold, seed=self.seed))


def _training_image(img: TYPE_IMAGE, cfg: FoldConfig) -> GrayImage:
    if not isinstance(img, GrayImage):
        img = GrayImage.load(img)
    img = crop_to_multiple(img, cfg.c)
    p, q = img.shape
    if p // cfg.c < cfg.a or q // cfg.c < cfg.a:
        raise GeometryError("training image {}x{} too small: need at least {}x{}",
                            p, q, cfg.a * cfg.c, cfg.a * cfg.c)
    return img


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x**2))) if x.size else 0.0


def train_model(spec: TrainSpec, verbose: int = 0) -> SRModel:
    """
    Train a super-resolution model:
      1. build the shifted-copies tensor of each image, and the derivative
         features of its downsampled-then-upsampled version
      2. fold both with the same cube origins
      3. remove the mean of each high-resolution cube
      4. learn the dictionary pair over the stacked problem
    """
    log = PiiLogger(__name__, verbose > 0)
    cfg = spec.fold

    log(". Loading %d training images", len(spec.images))
    images = [_training_image(img, cfg) for img in spec.images]

    log(". Building tensors (a=%d, r=%d, c=%d)", cfg.a, cfg.r, cfg.c)
    high = [shift_concat(img, cfg) for img in images]
    features: List[Sequence] = [
        extract_features(shift_concat(upsample(downsample(img, cfg.c), cfg.c), cfg))
        for img in images
    ]

    origins = sample_origins([h.dims for h in high], cfg)
    log(". Folding %d cubes", len(origins))
    th, _ = remove_cube_means(fold(high, cfg, origins))
    tl = fold_features(features, cfg, origins)
    for name, blk in ("high-resolution", th.block), ("feature", tl.block):
        if _rms(blk.slices) <= ROUNDOFF_RMS:
            raise DegenerateInputError("training images have no {} detail (constant images?)",
                                       name)

    problem = stack_problem(th, tl, spec.sparse.lam)
    log(". Training dictionaries (m=%d, T=%d, S=%d)", spec.atoms, spec.outer_iter,
        spec.sparse.max_iter)
    pair = train_dictionaries(problem, spec.atoms, spec.outer_iter, spec.sparse,
                              spec.seed, cfg, debug=verbose > 1)
    model = SRModel(pair)

    if spec.out:
        log(". Saving model to: %s", spec.out)
        dump_model(model, spec.out)
    return model
