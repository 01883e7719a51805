"""
Tensor sparse coding: for a fixed dictionary D (d x m x n) and data T
(d x N x n), solve

    min_C  1/2 ||T - D*C||_F^2 + lambda ||C||_1

with FISTA, an accelerated proximal gradient method. All products happen
per frequency slice after a DFT along the third dimension.
"""

from dataclasses import dataclass

from typing import Tuple

import numpy as np

from pii_data.helper.logger import PiiLogger

from ..helper.exception import (ConfigError, DivergenceError,
                                DegenerateInputError, TensorShapeError)
from ..tensor import Tensor3
from ..tensor.core import spectrum, inverse_spectrum

LIPSCHITZ_STRATEGIES = ("spectral", "frobenius_bound")
MONOTONE_STRATEGIES = ("mfista", "restart")

# relative allowance for rounding when comparing objective values
ROUNDING = 1e-14


@dataclass(frozen=True)
class SparseCodeConfig:
    """
      :param lam: sparsity weight
      :param max_iter: maximum number of iterations (S)
      :param tol: stop when the relative objective change falls below this
      :param lipschitz: how to compute the Lipschitz constant
      :param eta: safety factor applied to the Lipschitz constant
      :param monotone: how a step that increases the objective is handled
    """
    lam: float = 0.05
    max_iter: int = 50
    tol: float = 1e-7
    lipschitz: str = "spectral"
    eta: float = 1.0
    monotone: str = "mfista"

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigError("invalid sparse coding configuration: lambda >= 0")
        if self.max_iter < 1:
            raise ConfigError("invalid sparse coding configuration: S >= 1")
        if not self.tol >= 0:
            raise ConfigError("invalid sparse coding configuration: tol >= 0")
        if not self.eta >= 1:
            raise ConfigError("invalid sparse coding configuration: eta >= 1")
        if self.lipschitz not in LIPSCHITZ_STRATEGIES:
            raise ConfigError("invalid sparse coding configuration: lipschitz must be one of {}",
                              ", ".join(LIPSCHITZ_STRATEGIES))
        if self.monotone not in MONOTONE_STRATEGIES:
            raise ConfigError("invalid sparse coding configuration: monotone must be one of {}",
                              ", ".join(MONOTONE_STRATEGIES))


@dataclass(frozen=True, eq=False)
class CodingResult:
    """
      :param coeffs: the m x N x n coefficient tensor
      :param trace: objective value after each iteration
      :param iterations: iterations performed
      :param lipschitz: the Lipschitz constant used as inverse step size
      :param converged: the tolerance criterion was met before max_iter
      :param objective: objective value at `coeffs`
    """
    coeffs: Tensor3
    trace: Tuple[float, ...]
    iterations: int
    lipschitz: float
    converged: bool
    objective: float


# -------------------------------------------------------------------------


def _soft(x: np.ndarray, theta: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - theta, 0.0)


def soft_threshold(x: Tensor3, theta: float) -> Tensor3:
    """
    The proximal operator of theta*||.||_1: sign(x) max(|x| - theta, 0)
    """
    if theta < 0:
        raise ConfigError("soft-threshold level must be >= 0, got {}", theta)
    return Tensor3.from_slices(_soft(x.slices, theta), check=False)


def _hermitian(spec: np.ndarray) -> np.ndarray:
    return spec.conj().transpose(0, 2, 1)


def _check_coding(d: Tensor3, t: Tensor3, c: Tensor3 = None):
    if d.dims[0] != t.dims[0] or d.dims[2] != t.dims[2]:
        raise TensorShapeError("dictionary {} does not match data {}", d.dims, t.dims)
    if c is not None and c.dims != (d.dims[1], t.dims[1], d.dims[2]):
        raise TensorShapeError("coefficients {} do not match dictionary {} and data {}",
                               c.dims, d.dims, t.dims)


def grad_f(d: Tensor3, c: Tensor3, t: Tensor3) -> Tensor3:
    """
    Gradient of 1/2 ||T - D*C||_F^2 with respect to C, i.e. D^T * (D*C - T)
    with D^T the tensor transpose
    """
    _check_coding(d, t, c)
    ds = spectrum(d.slices)
    res = ds @ spectrum(c.slices) - spectrum(t.slices)
    return Tensor3.from_slices(inverse_spectrum(_hermitian(ds) @ res))


def _lipschitz(ds: np.ndarray, strategy: str, eta: float) -> float:
    if not np.any(ds):
        raise DegenerateInputError("cannot compute a Lipschitz constant for a zero dictionary")
    if strategy == "spectral":
        sigma = np.linalg.svd(ds, compute_uv=False)[:, 0]
        return eta * float(np.max(sigma))**2
    elif strategy == "frobenius_bound":
        gram = _hermitian(ds) @ ds
        return eta * float(np.sum(np.linalg.norm(gram, axis=(1, 2))))
    raise ConfigError("unknown Lipschitz strategy: {}", strategy)


def lipschitz_constant(d: Tensor3, strategy: str = "spectral",
                       eta: float = 1.0) -> float:
    """
    An upper bound of the Lipschitz constant of the gradient:
     - spectral: eta * max_b sigma_max(D_b)^2 over the frequency slices D_b
     - frobenius_bound: eta * sum_b ||D_b^H D_b||_F
    """
    return _lipschitz(spectrum(d.slices), strategy, eta)


def objective(d: Tensor3, c: Tensor3, t: Tensor3, lam: float) -> float:
    """
    1/2 ||T - D*C||_F^2 + lam ||C||_1, evaluated directly
    """
    _check_coding(d, t, c)
    rec = inverse_spectrum(spectrum(d.slices) @ spectrum(c.slices))
    return 0.5 * float(np.sum((t.slices - rec)**2)) + lam * float(np.abs(c.slices).sum())


# -------------------------------------------------------------------------


def fista(d: Tensor3, t: Tensor3, cfg: SparseCodeConfig, init: Tensor3 = None,
          lipschitz: float = None, debug: bool = False) -> CodingResult:
    """
    Solve the sparse coding problem with FISTA. The returned point is the
    best one seen, up to rounding, so the objective never goes up. With the
    "mfista" strategy a step that does not improve is kept only as a
    momentum direction; with "restart" the momentum is reset at the best
    point.
    Iterations stop early when a plain proximal step from the best point
    fails to descend, which means that L is too small.
      :param d: dictionary, d x m x n
      :param t: data, d x N x n
      :param cfg: solver parameters
      :param init: starting coefficients (default: zero)
      :param lipschitz: use this Lipschitz constant instead of computing it
      :param debug: activate debug output
    """
    _check_coding(d, t, init)
    log = PiiLogger(__name__, debug)
    n = d.dims[2]
    m, num = d.dims[1], t.dims[1]

    ds = spectrum(d.slices)
    dh = _hermitian(ds)
    gram = dh @ ds
    dtt = dh @ spectrum(t.slices)
    half_tnorm = 0.5 * float(np.sum(t.slices**2))
    L = lipschitz if lipschitz is not None else _lipschitz(ds, cfg.lipschitz, cfg.eta)
    lam = cfg.lam

    def value(c: np.ndarray, cs: np.ndarray, gcs: np.ndarray) -> float:
        # Parseval: <A, B> = Re <A~, B~> / n
        lin = np.vdot(cs, dtt).real
        quad = np.vdot(cs, gcs).real
        return half_tnorm + (0.5 * quad - lin) / n + lam * float(np.abs(c).sum())

    def prox_step(b: np.ndarray, gb: np.ndarray) -> Tuple[np.ndarray, np.ndarray, float]:
        z = _soft(b - inverse_spectrum(gb - dtt) / L, lam / L)
        zs = spectrum(z)
        gz = gram @ zs
        return z, gz, value(z, zs, gz)

    c = np.zeros((n, m, num)) if init is None else np.array(init.slices)
    cs = spectrum(c)
    gc = gram @ cs
    current = best = value(c, cs, gc)
    slack = ROUNDING * (half_tnorm + abs(current))
    b, gb = c, gc
    tk = 1.0
    trace = []
    converged = False

    for it in range(1, cfg.max_iter + 1):
        z, gz, obj = prox_step(b, gb)
        if not np.isfinite(obj):
            raise DivergenceError("FISTA diverged at iteration {} (L={:.6g})", it, L)
        trace.append(obj)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * tk * tk)) / 2.0

        if obj <= best + slack:
            beta = (tk - 1.0) / t_next
            b = z + beta * (z - c)
            gb = gz + beta * (gz - gc)
            change = abs(current - obj) / max(abs(current), np.finfo(float).tiny)
            c, gc, current, best, tk = z, gz, obj, min(best, obj), t_next
            if change < cfg.tol:
                converged = True
                break
            continue

        if b is c or prox_step(c, gc)[2] > best + slack:
            log(". fista: no descent from the best point at iteration %d", it)
            break
        if cfg.monotone == "restart":
            b, gb, tk = c, gc, 1.0
        else:
            r = tk / t_next
            b = c + r * (z - c)
            gb = gc + r * (gz - gc)
            tk = t_next

    log(". fista: %d iterations, objective=%.8g, L=%.6g", it, current, L)
    return CodingResult(coeffs=Tensor3.from_slices(c), trace=tuple(trace),
                        iterations=it, lipschitz=L, converged=converged,
                        objective=current)
