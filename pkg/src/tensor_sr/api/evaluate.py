"""
Evaluation of a model against ground-truth high-resolution images
"""

from dataclasses import dataclass
from pathlib import Path

from typing import Dict, Sequence, Tuple, Union

import numpy as np

from pii_data.helper.logger import PiiLogger

from ..helper.exception import ConfigError
from ..image import GrayImage, crop_to_multiple, downsample, upsample
from ..image import psnr, mean_abs_error
from ..sparse import SparseCodeConfig
from ..writer import SRModel, write_csv
from .source import image_files
from .superres import super_resolve, baseline, generation_config

METRICS = ("psnr", "mae", "bicubic_psnr", "bicubic_mae", "baseline_psnr")


@dataclass(frozen=True)
class EvalRow:
    name: str
    psnr: float
    mae: float
    bicubic_psnr: float
    bicubic_mae: float
    baseline_psnr: float

    def values(self) -> Tuple[float, ...]:
        return tuple(getattr(self, m) for m in METRICS)


@dataclass(frozen=True)
class EvalReport:
    """
    Per-image quality figures of a model, plus their means
    """
    rows: Tuple[EvalRow, ...]

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def aggregate(self) -> Dict[str, float]:
        table = np.array([r.values() for r in self.rows])
        return dict(zip(METRICS, (float(v) for v in table.mean(axis=0))))

    def dump(self, outname: Union[str, Path]):
        """
        Write the report as CSV, with a final row holding the means
        """
        agg = self.aggregate
        rows = [(r.name,) + r.values() for r in self.rows]
        rows.append(("mean",) + tuple(agg[m] for m in METRICS))
        write_csv(rows, outname, header=("image",) + METRICS)


def eval_model(model: SRModel, images: Union[str, Path, Sequence[Path]],
               cfg: SparseCodeConfig = None, verbose: int = 0) -> EvalReport:
    """
    Downsample each ground-truth image, super-resolve it back and compare
    the result, and the bicubic upsampling, against the original
      :param model: the model to evaluate
      :param images: a directory of PNG/PGM images, or a list of image files
      :param cfg: sparse coding parameters for generation
    """
    log = PiiLogger(__name__, verbose > 0)
    files = image_files(images) if isinstance(images, (str, Path)) else list(images)
    if not files:
        raise ConfigError("no images to evaluate")
    c = model.fold.c
    cfg = cfg or generation_config(model)

    rows = []
    for f in files:
        log(". Evaluating: %s", f)
        truth = crop_to_multiple(GrayImage.load(f), c)
        low = downsample(truth, c)
        out = super_resolve(model, low, cfg, debug=verbose > 1)
        bic = upsample(low, c)
        rows.append(EvalRow(name=Path(f).name,
                            psnr=psnr(out, truth), mae=mean_abs_error(out, truth),
                            bicubic_psnr=psnr(bic, truth),
                            bicubic_mae=mean_abs_error(bic, truth),
                            baseline_psnr=psnr(baseline(model, low), truth)))
    return EvalReport(tuple(rows))
