"""
Test reconstruction quality on a small synthetic corpus: the model must do
at least as well as bicubic upsampling on held-out images. This trains a
full-size model and takes about a minute
"""

import numpy as np

from tensor_sr.image import GrayImage
from tensor_sr.fold import FoldConfig
from tensor_sr.sparse import SparseCodeConfig
from tensor_sr.api import TrainSpec, train_model, eval_model


def stripes(p: int, q: int, angle: float, period: float) -> GrayImage:
    i, j = np.indices((p, q))
    phase = 2 * np.pi * (j * np.cos(angle) + i * np.sin(angle)) / period
    return GrayImage(0.5 + 0.4 * np.sin(phase))


def corpus(num: int, seed: int):
    """Oriented stripes with random angles and periods"""
    rng = np.random.default_rng(seed)
    return [stripes(32, 32, rng.uniform(0, np.pi), rng.uniform(3.0, 8.0))
            for _ in range(num)]


def test10_better_than_bicubic(tmp_path):
    """
    Test that the mean PSNR of the model over held-out images is not below
    that of bicubic upsampling
    """
    images = corpus(25, seed=11)
    spec = TrainSpec(images=tuple(images[:20]),
                     fold=FoldConfig(a=4, r=7, c=2, sample_budget=5000),
                     sparse=SparseCodeConfig(lam=0.05, max_iter=50),
                     atoms=64, outer_iter=5, seed=0)
    model = train_model(spec)

    names = []
    for n, img in enumerate(images[20:]):
        names.append(tmp_path / "held{}.pgm".format(n))
        img.save(names[-1])
    agg = eval_model(model, names).aggregate
    assert agg["psnr"] >= agg["bicubic_psnr"]
