"""
Tensor dictionary learning: alternate sparse coding (FISTA) with the
closed-form dictionary update solved through its Lagrange dual
"""

from dataclasses import dataclass, replace

from typing import List, Tuple

import numpy as np

from pii_data.helper.logger import PiiLogger

from ..helper.exception import DegenerateInputError, TensorShapeError
from ..tensor import Tensor3
from ..tensor.core import spectrum, inverse_spectrum
from ..fold import FoldConfig
from ..sparse import SparseCodeConfig, fista
from .dual import DualState, DualResult, DualProblem, solve_dual, with_omega
from .joint import JointProblem, joint_objective, unstack_dictionary


@dataclass(frozen=True)
class TrainingMeta:
    """
    How a dictionary pair was trained
    """
    lam: float
    seed: int = 0
    outer_iter: int = 0
    inner_iter: int = 0
    tol: float = 0.0
    num_samples: int = 0
    sample_budget: int = 0
    trace: Tuple[float, ...] = ()
    warnings: Tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class DictionaryPair:
    """
    The coupled dictionaries: dh (d_h x m x n) for high-resolution
    reconstruction, dl (d_l x m x n) for low-resolution features. They are
    kept at the scale of the stacked problem; generation rescales them by
    sqrt(N)
    """
    dh: Tensor3
    dl: Tensor3
    fold: FoldConfig
    meta: TrainingMeta

    def __post_init__(self):
        if self.dh.dims[1:] != self.dl.dims[1:]:
            raise TensorShapeError("dictionaries {} and {} do not share m and n",
                                   self.dh.dims, self.dl.dims)
        if (self.dh.dims[0], self.dl.dims[0], self.dh.dims[2]) != \
           (self.fold.d, self.fold.d_low, self.fold.n):
            raise TensorShapeError("dictionary dims {} / {} do not fit a={}",
                                   self.dh.dims, self.dl.dims, self.fold.a)

    @property
    def num_atoms(self) -> int:
        return self.dh.dims[1]

    def stacked(self) -> Tensor3:
        return Tensor3.from_slices(np.concatenate([self.dh.slices, self.dl.slices],
                                                  axis=1), check=False)


@dataclass(frozen=True, eq=False)
class DictionaryUpdate:
    """
      :param dictionary: the updated dictionary
      :param dual: the dual solution, None if there were no active atoms
      :param kept: the previous dictionary was returned unchanged
    """
    dictionary: Tensor3
    dual: DualResult = None
    kept: bool = False


@dataclass(frozen=True, eq=False)
class LearningResult:
    dictionary: Tensor3
    codes: Tensor3
    trace: Tuple[float, ...]
    warnings: Tuple[str, ...]
    omega: np.ndarray


# -------------------------------------------------------------------------


def _residual(xs: np.ndarray, ds: np.ndarray, cs: np.ndarray) -> float:
    """||X - D*C||_F^2, computed from the spectra"""
    return float(np.sum(np.abs(xs - ds @ cs)**2)) / xs.shape[0]


def _normalize_atoms(slices: np.ndarray) -> np.ndarray:
    """Scale every lateral slice whose squared norm exceeds 1 back to 1"""
    norms = np.sum(slices**2, axis=(0, 1))
    over = norms > 1.0
    if over.any():
        slices[:, :, over] /= np.sqrt(norms[over])
    return slices


def dictionary_update(x: Tensor3, c: Tensor3, d_prev: Tensor3,
                      state: DualState = None, debug: bool = False) -> DictionaryUpdate:
    """
    Minimize ||X - D*C||_F^2 over dictionaries with atoms of norm <= 1.
    Atoms not used by any coefficient keep their previous value; if the
    result fits worse than `d_prev`, `d_prev` is returned
      :param x: data, d x N x n
      :param c: coefficients, m x N x n
      :param d_prev: current dictionary, d x m x n
      :param state: dual starting point and Newton settings
    """
    d, num, n = x.dims
    m = d_prev.dims[1]
    if d_prev.dims != (d, m, n) or c.dims != (m, num, n):
        raise TensorShapeError("cannot update dictionary {} from data {} and coefficients {}",
                               d_prev.dims, x.dims, c.dims)
    state = state or DualState()
    active = np.any(c.slices != 0, axis=(0, 2))
    if not active.any():
        return DictionaryUpdate(d_prev, kept=True)

    xs = spectrum(x.slices)
    cs = spectrum(c.slices)
    omega0 = None if state.omega is None else np.asarray(state.omega)[active]
    dual = solve_dual(xs, cs[:, active], with_omega(state, omega0), debug=debug)
    ds_active = DualProblem(xs, cs[:, active]).dictionary(dual.omega)

    new = np.array(d_prev.slices)
    new[:, :, active] = inverse_spectrum(ds_active)
    new = _normalize_atoms(new)

    omega = np.zeros(m)
    omega[active] = dual.omega
    full_dual = DualResult(omega=omega, value=dual.value, iterations=dual.iterations,
                           converged=dual.converged, ridge=dual.ridge)
    if _residual(xs, spectrum(new), cs) > _residual(xs, spectrum(d_prev.slices), cs):
        return DictionaryUpdate(d_prev, full_dual, kept=True)
    return DictionaryUpdate(Tensor3.from_slices(new), full_dual)


def _initial_dictionary(xs: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """
    m randomly chosen nonzero training columns, normalized; random Gaussian
    atoms complete the set if there are not enough of them
    """
    norms = np.sum(xs**2, axis=(0, 1))
    nonzero = np.flatnonzero(norms > 0)
    pick = rng.permutation(nonzero)[:m]
    atoms = xs[:, :, pick] / np.sqrt(norms[pick])
    if len(pick) < m:
        extra = rng.standard_normal(xs.shape[:2] + (m - len(pick),))
        extra /= np.sqrt(np.sum(extra**2, axis=(0, 1)))
        atoms = np.concatenate([atoms, extra], axis=2)
    return atoms


def _reseed_dead_atoms(x: Tensor3, d: Tensor3, c: Tensor3) -> Tuple[Tensor3, int]:
    """
    Replace atoms not used by any sample with the worst reconstructed
    training columns
    """
    dead = np.flatnonzero(~np.any(c.slices != 0, axis=(0, 2)))
    if len(dead) == 0:
        return d, 0
    xs = x.slices
    rec = inverse_spectrum(spectrum(d.slices) @ spectrum(c.slices))
    err = np.sum((xs - rec)**2, axis=(0, 1))
    norms = np.sum(xs**2, axis=(0, 1))
    order = [s for s in np.argsort(-err, kind="stable") if err[s] > 0 and norms[s] > 0]
    num = min(len(dead), len(order))
    if num == 0:
        return d, 0
    cols = np.array(order[:num])
    new = np.array(d.slices)
    new[:, :, dead[:num]] = xs[:, :, cols] / np.sqrt(norms[cols])
    return Tensor3.from_slices(new), num


def learn_dictionary(x: Tensor3, m: int, outer_iter: int, cfg: SparseCodeConfig,
                     seed: int = 0, state: DualState = None,
                     debug: bool = False) -> LearningResult:
    """
    Learn a d x m x n dictionary for the data x by alternating minimization
      :param x: training data, d x N x n
      :param m: number of atoms
      :param outer_iter: number of (coding, dictionary update) rounds
      :param cfg: sparse coding parameters
      :param seed: seed for the dictionary initialization
      :param state: Newton settings for the dictionary update
      :return: the dictionary, the final codes, the objective after every
        half-step (starting with the initial one) and warnings
    """
    log = PiiLogger(__name__, debug)
    d_rows, num, n = x.dims
    if not np.any(x.slices):
        raise DegenerateInputError("all training blocks are zero")
    if m < 1:
        raise TensorShapeError("need at least one atom, got m={}", m)

    warnings: List[str] = []

    def warn(msg: str):
        if msg not in warnings:
            log(". warning: %s", msg)
            warnings.append(msg)

    if num < m:
        warn("fewer training samples ({}) than atoms ({})".format(num, m))

    rng = np.random.default_rng(seed)
    d = Tensor3.from_slices(_initial_dictionary(x.slices, m, rng))
    codes = Tensor3.from_slices(np.zeros((n, m, num)), check=False)
    state = state or DualState()
    omega = np.zeros(m)
    trace = [joint_objective(x, d, codes, cfg.lam)]
    log(". learning: d=%d m=%d n=%d N=%d, initial objective=%.8g",
        d_rows, m, n, num, trace[0])

    for it in range(1, outer_iter + 1):
        codes = fista(d, x, cfg, init=codes, debug=debug).coeffs
        trace.append(joint_objective(x, d, codes, cfg.lam))

        d, reseeded = _reseed_dead_atoms(x, d, codes)
        if reseeded:
            log(". reseeded %d unused atoms", reseeded)

        upd = dictionary_update(x, codes, d, with_omega(state, omega), debug=debug)
        d = upd.dictionary
        if upd.dual is not None:
            omega = upd.dual.omega
            if not upd.dual.converged:
                warn("dictionary update: Newton did not converge")
            if upd.dual.ridge:
                warn("dictionary update: ridge fallback used")
        trace.append(joint_objective(x, d, codes, cfg.lam))
        log(". iteration %d: objective=%.8g", it, trace[-1])

    return LearningResult(dictionary=d, codes=codes, trace=tuple(trace),
                          warnings=tuple(warnings), omega=omega)


def train_dictionaries(problem: JointProblem, m: int, outer_iter: int,
                       cfg: SparseCodeConfig, seed: int, fold_cfg: FoldConfig,
                       debug: bool = False) -> DictionaryPair:
    """
    Learn the coupled dictionary pair for a stacked problem
    """
    sparse = replace(cfg, lam=problem.lam)
    res = learn_dictionary(problem.x, m, outer_iter, sparse, seed, debug=debug)
    dh, dl = unstack_dictionary(res.dictionary, problem.d_high)
    meta = TrainingMeta(lam=problem.lam, outer_iter=outer_iter,
                        inner_iter=cfg.max_iter, tol=cfg.tol, seed=seed,
                        num_samples=problem.num_samples,
                        sample_budget=fold_cfg.sample_budget, trace=res.trace,
                        warnings=res.warnings)
    return DictionaryPair(dh=dh, dl=dl, fold=fold_cfg, meta=meta)
