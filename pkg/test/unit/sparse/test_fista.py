"""
Test tensor sparse coding with FISTA
"""

import numpy as np
import pytest

from tensor_sr.helper.exception import ConfigError, DegenerateInputError, TensorShapeError
from tensor_sr.tensor import Tensor3, tproduct, ttranspose, identity_tensor, zeros, random_tensor
from tensor_sr.sparse import (SparseCodeConfig, soft_threshold, grad_f,
                              lipschitz_constant, objective, fista)


def unit_atoms(d: int, m: int, n: int, rng) -> Tensor3:
    """A random dictionary with unit-norm atoms"""
    arr = rng.standard_normal((n, d, m))
    arr /= np.sqrt(np.sum(arr**2, axis=(0, 1)))
    return Tensor3.from_slices(arr)


def f_value(d: Tensor3, c: np.ndarray, t: Tensor3) -> float:
    res = t.slices - tproduct(d, Tensor3.from_slices(c)).slices
    return 0.5 * float(np.sum(res**2))


def ista(ds: np.ndarray, ts: np.ndarray, lam: float, iters: int) -> np.ndarray:
    """
    Plain proximal gradient over a batch of problems; ds is (B, n, d, m) and
    ts (B, n, d, N), both in the spatial domain
    """
    dspec = np.fft.fft(ds, axis=1)
    dh = dspec.conj().transpose(0, 1, 3, 2)
    gram = dh @ dspec
    dtt = dh @ np.fft.fft(ts, axis=1)
    L = np.max(np.linalg.svd(dspec, compute_uv=False)[..., 0]**2, axis=1)
    L = L[:, None, None, None]
    c = np.zeros(ds.shape[:2] + (ds.shape[3], ts.shape[3]))
    for _ in range(iters):
        grad = np.fft.ifft(gram @ np.fft.fft(c, axis=1) - dtt, axis=1).real
        z = c - grad / L
        c = np.sign(z) * np.maximum(np.abs(z) - lam / L, 0.0)
    return c


# -----------------------------------------------------------------------


def test10_soft_threshold():
    """
    Test the proximal operator of the l1 norm
    """
    x = Tensor3(np.array([0.3, -0.02, -0.4, 0.05]).reshape(1, 4, 1))
    got = soft_threshold(x, 0.05).slices.ravel()
    np.testing.assert_allclose(got, [0.25, 0.0, -0.35, 0.0], atol=1e-15)
    np.testing.assert_array_equal(soft_threshold(x, 0).slices, x.slices)
    with pytest.raises(ConfigError):
        soft_threshold(x, -0.1)


def test11_config():
    """
    Test the sparse coding configuration checks
    """
    cfg = SparseCodeConfig()
    assert (cfg.lam, cfg.max_iter, cfg.tol, cfg.lipschitz, cfg.eta, cfg.monotone) == \
        (0.05, 50, 1e-7, "spectral", 1.0, "mfista")
    for bad in ({"lam": -1}, {"max_iter": 0}, {"tol": -1}, {"eta": 0.5},
                {"lipschitz": "other"}, {"monotone": "other"}):
        with pytest.raises(ConfigError):
            SparseCodeConfig(**bad)


# -----------------------------------------------------------------------


def test20_gradient_simple():
    """
    Test the gradient at a stationary point and for the identity dictionary
    """
    rng = np.random.default_rng(0)
    d = random_tensor(4, 3, 5, rng)
    c = random_tensor(3, 6, 5, rng)
    t = tproduct(d, c)
    np.testing.assert_allclose(grad_f(d, c, t).slices, 0, atol=1e-12)

    eye = identity_tensor(3, 5)
    got = grad_f(eye, c, zeros(3, 6, 5))
    np.testing.assert_allclose(got.slices, c.slices, atol=1e-12)

    exp = tproduct(ttranspose(d), tproduct(d, c) - t)
    np.testing.assert_allclose(grad_f(d, c, t).slices, exp.slices, atol=1e-12)


def test21_gradient_finite_differences():
    """
    Test the gradient against central finite differences
    """
    rng = np.random.default_rng(1)
    eps = 1e-6
    for _ in range(10):
        d = random_tensor(3, 4, 3, rng)
        c = random_tensor(4, 5, 3, rng)
        t = random_tensor(3, 5, 3, rng)
        grad = grad_f(d, c, t).slices
        num = np.zeros_like(grad)
        base = np.array(c.slices)
        for idx in np.ndindex(*base.shape):
            plus, minus = base.copy(), base.copy()
            plus[idx] += eps
            minus[idx] -= eps
            num[idx] = (f_value(d, plus, t) - f_value(d, minus, t)) / (2 * eps)
        assert np.linalg.norm(num - grad) <= 1e-6 * np.linalg.norm(grad)


def test22_gradient_shapes():
    """
    Test shape checking
    """
    with pytest.raises(TensorShapeError):
        grad_f(random_tensor(3, 4, 2, 0), random_tensor(4, 5, 2, 0),
               random_tensor(2, 5, 2, 0))


# -----------------------------------------------------------------------


def test30_lipschitz():
    """
    Test the Lipschitz constant strategies
    """
    assert lipschitz_constant(identity_tensor(4, 3)) == pytest.approx(1.0)
    assert lipschitz_constant(identity_tensor(4, 3), eta=2.0) == pytest.approx(2.0)
    rng = np.random.default_rng(2)
    for _ in range(5):
        d = random_tensor(4, 6, 4, rng)
        assert lipschitz_constant(d, "frobenius_bound") >= lipschitz_constant(d)
    with pytest.raises(DegenerateInputError):
        lipschitz_constant(zeros(3, 3, 2))


def test31_lipschitz_power_iteration():
    """
    Test that the spectral constant bounds the norm of the Hessian
    """
    rng = np.random.default_rng(3)
    d = random_tensor(4, 6, 4, rng)
    L = lipschitz_constant(d)
    zero = zeros(4, 8, 4)
    v = random_tensor(6, 8, 4, rng)
    for _ in range(300):
        w = grad_f(d, v, zero)
        est = np.linalg.norm(w.slices) / np.linalg.norm(v.slices)
        v = Tensor3.from_slices(w.slices / np.linalg.norm(w.slices))
    assert est <= L * (1 + 1e-6)
    assert est >= 0.99 * L


# -----------------------------------------------------------------------


def test40_fista_scalar():
    """
    Test the analytic solution of a scalar instance
    """
    d = Tensor3(np.ones((1, 1, 1)))
    t = Tensor3(np.ones((1, 1, 1)))
    res = fista(d, t, SparseCodeConfig(lam=0.05))
    assert res.coeffs.slices[0, 0, 0] == pytest.approx(0.95, abs=1e-12)
    assert res.converged
    assert res.lipschitz == pytest.approx(1.0)


def test41_fista_zero_data():
    """
    Test that zero data gives zero coefficients
    """
    rng = np.random.default_rng(4)
    res = fista(unit_atoms(4, 8, 4, rng), zeros(4, 10, 4), SparseCodeConfig())
    assert not np.any(res.coeffs.slices)
    assert all(v == 0 for v in res.trace)


def test42_fista_large_lambda():
    """
    Test that a lambda above the largest correlation gives zero coefficients
    """
    rng = np.random.default_rng(5)
    d = unit_atoms(4, 8, 4, rng)
    t = random_tensor(4, 10, 4, rng)
    lam = float(np.max(np.abs(grad_f(d, zeros(8, 10, 4), t).slices))) * 1.01
    res = fista(d, t, SparseCodeConfig(lam=lam))
    assert not np.any(res.coeffs.slices)


def test43_fista_ista_oracle():
    """
    Test FISTA against a long run of plain ISTA, after a fixed number of
    iterations
    """
    rng = np.random.default_rng(6)
    lam = 0.05
    ds = [unit_atoms(4, 8, 4, rng) for _ in range(20)]
    ts = [random_tensor(4, 16, 4, rng) for _ in range(20)]
    oracle = ista(np.stack([d.slices for d in ds]), np.stack([t.slices for t in ts]),
                  lam, 50000)
    cfg = SparseCodeConfig(lam=lam, max_iter=500, tol=0)
    for d, t, c_ref in zip(ds, ts, oracle):
        res = fista(d, t, cfg)
        ref = objective(d, Tensor3.from_slices(c_ref), t, lam)
        assert res.objective - ref <= 2e-5 * max(1.0, ref)
        assert res.objective == pytest.approx(objective(d, res.coeffs, t, lam), rel=1e-10)


@pytest.mark.parametrize("monotone", ["mfista", "restart"])
def test44_fista_monotone(monotone):
    """
    Test that the result never has a higher objective than the start, even
    with an underestimated Lipschitz constant
    """
    rng = np.random.default_rng(7)
    d = unit_atoms(4, 8, 4, rng)
    t = random_tensor(4, 16, 4, rng)
    cfg = SparseCodeConfig(lam=0.05, max_iter=100, monotone=monotone)
    start = 0.5 * float(np.sum(t.slices**2))
    for L in (None, lipschitz_constant(d) / 10):
        res = fista(d, t, cfg, lipschitz=L)
        assert res.objective <= start
        assert res.objective == pytest.approx(min(res.trace + (start,)), rel=1e-12)


def test45_fista_warm_start():
    """
    Test that a warm start does not increase the objective
    """
    rng = np.random.default_rng(8)
    d = unit_atoms(4, 8, 4, rng)
    t = random_tensor(4, 16, 4, rng)
    cfg = SparseCodeConfig(lam=0.05, max_iter=10)
    first = fista(d, t, cfg)
    again = fista(d, t, cfg, init=first.coeffs)
    assert again.objective <= first.objective + 1e-12
    with pytest.raises(TensorShapeError):
        fista(d, t, cfg, init=zeros(8, 15, 4))


def test46_fista_fixed_point():
    """
    Test the optimality conditions at the point FISTA converges to, on
    well-conditioned problems: the result is a fixed point of the proximal
    step, and the gradient is a subgradient of -lambda ||C||_1
    """
    rng = np.random.default_rng(9)
    lam = 0.5
    cfg = SparseCodeConfig(lam=lam, max_iter=20000, tol=0)
    for _ in range(3):
        d = unit_atoms(8, 3, 4, rng)
        t = random_tensor(8, 6, 4, rng)
        res = fista(d, t, cfg)
        c = res.coeffs.slices
        grad = grad_f(d, res.coeffs, t).slices
        L = res.lipschitz

        step = soft_threshold(Tensor3.from_slices(c - grad / L), lam / L).slices
        np.testing.assert_allclose(step, c, rtol=0, atol=1e-8)

        nz = c != 0
        assert np.any(nz) and not np.all(nz)
        assert np.all(np.abs(grad[~nz]) <= lam + 1e-8)
        np.testing.assert_allclose(grad[nz], -lam * np.sign(c[nz]), rtol=0, atol=1e-8)
