"""
The joint problem: high-resolution blocks and low-resolution feature blocks
are stacked into one data tensor, so that a single set of sparse codes is
shared by the two dictionaries
"""

from dataclasses import dataclass

from typing import Tuple

import numpy as np

from ..helper.exception import TensorShapeError
from ..tensor import Tensor3
from ..fold import TensorBlock
from ..sparse import objective


@dataclass(frozen=True, eq=False)
class JointProblem:
    """
      :param th: high-resolution block, d_h x N x n
      :param tl: low-resolution feature block, d_l x N x n
      :param weights: stacking weights for th and tl
      :param lam: sparsity weight of the stacked problem
      :param x: the stacked data tensor, (d_h + d_l) x N x n
    """
    th: TensorBlock
    tl: TensorBlock
    weights: Tuple[float, float]
    lam: float
    x: Tensor3

    @property
    def d_high(self) -> int:
        return self.th.block.dims[0]

    @property
    def num_samples(self) -> int:
        return self.th.num_samples


def stack_problem(th: TensorBlock, tl: TensorBlock, lam: float) -> JointProblem:
    """
    Build the stacked data [th/sqrt(N); tl/sqrt(M)]. Both blocks come from
    the same cube origins, hence M = N
    """
    (_, nh, n3h), (_, nl, n3l) = th.block.dims, tl.block.dims
    if nh != nl:
        raise TensorShapeError("high-res block has {} samples, low-res block {}", nh, nl)
    if n3h != n3l:
        raise TensorShapeError("tube length mismatch: {} vs {}", n3h, n3l)
    if not np.array_equal(th.origins, tl.origins):
        raise TensorShapeError("high-res and low-res blocks come from different cubes")
    if nh == 0:
        raise TensorShapeError("empty training blocks")
    wh = wl = 1.0 / np.sqrt(nh)
    x = np.concatenate([th.block.slices * wh, tl.block.slices * wl], axis=1)
    return JointProblem(th=th, tl=tl, weights=(wh, wl), lam=lam,
                        x=Tensor3.from_slices(x, check=False))


def stack_dictionary(dh: Tensor3, dl: Tensor3, n_samples: int) -> Tensor3:
    """
    The stacked dictionary [dh; dl] / sqrt(N) for a pair at data scale
    """
    if dh.dims[1:] != dl.dims[1:]:
        raise TensorShapeError("dictionaries {} and {} do not share m and n",
                               dh.dims, dl.dims)
    w = 1.0 / np.sqrt(n_samples)
    return Tensor3.from_slices(np.concatenate([dh.slices * w, dl.slices * w], axis=1))


def unstack_dictionary(d: Tensor3, d_high: int,
                       n_samples: int = None) -> Tuple[Tensor3, Tensor3]:
    """
    Split a stacked dictionary into its high-res and low-res parts
      :param d_high: rows belonging to the high-res part
      :param n_samples: if given, rescale by sqrt(N) back to data scale
    """
    if not 0 < d_high < d.dims[0]:
        raise TensorShapeError("cannot split {} rows at {}", d.dims[0], d_high)
    scale = 1.0 if n_samples is None else np.sqrt(n_samples)
    s = d.slices
    return (Tensor3.from_slices(s[:, :d_high] * scale),
            Tensor3.from_slices(s[:, d_high:] * scale))


def joint_objective(x: Tensor3, d: Tensor3, c: Tensor3, lam: float) -> float:
    """
    Training objective 1/2 ||X - D*C||_F^2 + lam ||C||_1 of the stacked problem
    """
    return objective(d, c, x, lam)
