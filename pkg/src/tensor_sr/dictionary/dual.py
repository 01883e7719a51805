"""
Dictionary update for fixed coefficients through the Lagrange dual.

Per frequency slice b the dictionary minimizing
    sum_b ||X_b - D_b C_b||_F^2   s.t.  sum_b ||D_b(:, j)||^2 <= n  for every atom j
is D_b = X_b C_b^H (C_b C_b^H + Omega)^-1, Omega = diag(omega). The
multipliers omega >= 0 maximize the concave dual

    g(omega) = sum_b ( ||X_b||^2 - Re tr(X_b C_b^H (C_b C_b^H + Omega)^-1 C_b X_b^H) )
               - n sum_j omega_j

which is solved by a projected Newton method with backtracking.
"""

from dataclasses import dataclass, replace

from typing import Tuple

import numpy as np

from pii_data.helper.logger import PiiLogger

from ..helper.exception import ConditioningError, ConfigError, TensorShapeError

# Ridge added to ill-conditioned systems
RIDGE = 1e-8
COND_LIMIT = 1e12

# Sufficient-increase parameter of the line search
ARMIJO = 1e-4


@dataclass(frozen=True, eq=False)
class DualState:
    """
      :param omega: starting multipliers (default: all zero)
      :param tol: stop when the projected dual gradient falls below this
      :param max_iter: maximum number of Newton iterations
      :param backtrack: step reduction factor of the line search
    """
    omega: np.ndarray = None
    tol: float = 1e-8
    max_iter: int = 50
    backtrack: float = 0.5

    def __post_init__(self):
        if self.omega is not None and np.any(np.asarray(self.omega) < 0):
            raise ConfigError("dual variables must be nonnegative")
        if self.max_iter < 1 or not 0 < self.backtrack < 1:
            raise ConfigError("invalid Newton settings")


@dataclass(frozen=True, eq=False)
class DualResult:
    """
      :param omega: the dual variables found
      :param value: dual objective at omega
      :param iterations: Newton iterations performed
      :param converged: the gradient tolerance was reached
      :param ridge: some slice needed the ridge fallback
    """
    omega: np.ndarray
    value: float
    iterations: int
    converged: bool
    ridge: bool


def _hermitian(spec: np.ndarray) -> np.ndarray:
    return spec.conj().transpose(0, 2, 1)


def _system(cc: np.ndarray, omega: np.ndarray) -> Tuple[np.ndarray, bool]:
    """
    Build C C^H + Omega for every slice, adding a ridge where it is singular
    """
    k = cc + np.diag(omega)
    with np.errstate(all="ignore"):
        bad = ~(np.linalg.cond(k) <= COND_LIMIT)
    if bad.any():
        k[bad] += RIDGE * np.eye(k.shape[-1])
    return k, bool(bad.any())


def _solve_right(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    """A K^-1 for Hermitian K, slice by slice"""
    try:
        return _hermitian(np.linalg.solve(k, _hermitian(a)))
    except np.linalg.LinAlgError as e:
        raise ConditioningError("singular dictionary system: {}", e) from e


class DualProblem:
    """
    The dual of the dictionary update, for spectra X~ (n x d x N) and
    C~ (n x m x N)
    """

    def __init__(self, xs: np.ndarray, cs: np.ndarray):
        if xs.shape[0] != cs.shape[0] or xs.shape[2] != cs.shape[2]:
            raise TensorShapeError("data spectrum {} does not match coefficients {}",
                                   xs.shape, cs.shape)
        self.n = xs.shape[0]
        self.m = cs.shape[1]
        self.a = xs @ _hermitian(cs)
        self.cc = cs @ _hermitian(cs)
        self.xnorm = float(np.sum(np.abs(xs)**2))

    def dictionary(self, omega: np.ndarray) -> np.ndarray:
        """The dictionary spectrum for the given multipliers"""
        k, _ = _system(self.cc, omega)
        return _solve_right(self.a, k)

    def value(self, omega: np.ndarray) -> float:
        ds = self.dictionary(omega)
        return self.xnorm - np.vdot(self.a, ds).real - self.n * float(np.sum(omega))

    def derivatives(self, omega: np.ndarray):
        """
        Dual value, gradient and Hessian at omega
        """
        k, ridge = _system(self.cc, omega)
        try:
            kinv = np.linalg.inv(k)
        except np.linalg.LinAlgError as e:
            raise ConditioningError("singular dictionary system: {}", e) from e
        ds = self.a @ kinv
        val = self.xnorm - np.vdot(self.a, ds).real - self.n * float(np.sum(omega))
        grad = np.sum(np.abs(ds)**2, axis=(0, 1)) - self.n
        p = _hermitian(ds) @ ds
        hess = -2.0 * np.sum((kinv * p.transpose(0, 2, 1)).real, axis=0)
        return val, grad, 0.5 * (hess + hess.T), ridge


def dict_slice_update(x_slice: np.ndarray, c_slice: np.ndarray,
                      omega: np.ndarray) -> np.ndarray:
    """
    Closed-form dictionary for one frequency slice:
    X C^H (C C^H + diag(omega))^-1
    """
    x_slice = np.asarray(x_slice, dtype=np.complex128)[None]
    c_slice = np.asarray(c_slice, dtype=np.complex128)[None]
    return DualProblem(x_slice, c_slice).dictionary(np.asarray(omega, float))[0]


def _projected_gradient(omega: np.ndarray, grad: np.ndarray) -> np.ndarray:
    return np.where(omega > 0, grad, np.maximum(grad, 0.0))


def solve_dual(xs: np.ndarray, cs: np.ndarray, state: DualState = None,
               debug: bool = False) -> DualResult:
    """
    Maximize the dual over omega >= 0 with a projected Newton method
      :param xs: data spectrum, n x d x N
      :param cs: coefficient spectrum, n x m x N
      :param state: starting point and Newton settings
    """
    state = state or DualState()
    log = PiiLogger(__name__, debug)
    prob = DualProblem(xs, cs)
    omega = np.zeros(prob.m) if state.omega is None else \
        np.maximum(np.asarray(state.omega, dtype=float), 0.0)
    if omega.shape != (prob.m,):
        raise TensorShapeError("{} dual variables for {} atoms", omega.shape, prob.m)

    converged = False
    used_ridge = False
    it = 0
    for it in range(1, state.max_iter + 1):
        val, grad, hess, ridge = prob.derivatives(omega)
        used_ridge |= ridge
        if np.max(np.abs(_projected_gradient(omega, grad))) <= state.tol:
            converged = True
            break

        # Newton direction over the variables not blocked at zero
        free = (omega > 0) | (grad > 0)
        step = np.zeros_like(omega)
        hfree = -hess[np.ix_(free, free)]
        try:
            step[free] = np.linalg.solve(hfree, grad[free])
        except np.linalg.LinAlgError:
            step[free] = grad[free]
        if grad @ step <= 0:
            step = np.where(free, grad, 0.0)

        alpha = 1.0
        slack = 1e-12 * max(1.0, abs(val))
        while alpha > 1e-12:
            cand = np.maximum(omega + alpha * step, 0.0)
            cval = prob.value(cand)
            if cval >= val + ARMIJO * (grad @ (cand - omega)) - slack:
                break
            alpha *= state.backtrack
        else:
            log(". dual: line search failed at iteration %d", it)
            break
        omega = cand

    val = prob.value(omega)
    if not converged:
        log(". dual: no convergence after %d iterations", it)
    return DualResult(omega=omega, value=val, iterations=it,
                      converged=converged, ridge=used_ridge)


def dual_value(xs: np.ndarray, cs: np.ndarray, omega: np.ndarray) -> float:
    """The dual objective at a given omega"""
    return DualProblem(xs, cs).value(np.asarray(omega, dtype=float))


def with_omega(state: DualState, omega: np.ndarray) -> DualState:
    return replace(state, omega=omega)
