import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp
from scipy import integrate as sci_integrate

from susyqm.numerics import (
    GridSpec,
    QuadratureError,
    QuadratureSpec,
    SingularMatrixError,
    central_derivative,
    integrate,
    lin_solve,
    lu_det,
    lu_factor,
    lu_slogdet,
    numerov_integrate,
    second_log_derivative,
)


def vandermonde(gammas):
    g = np.asarray(gammas, dtype=float)
    return g[None, :] ** np.arange(g.size)[:, None]


# ---------------------------------------------------------------- specs


def test_quadrature_spec_validation():
    for bad in [dict(abs_tol=0), dict(rel_tol=-1), dict(max_subdivisions=0)]:
        with pytest.raises(ValueError):
            QuadratureSpec(**bad)


def test_grid_spec():
    g = GridSpec(0.0, 1.0, 0.25)
    assert g.intervals == 4
    assert np.allclose(g.nodes(), [0, 0.25, 0.5, 0.75, 1.0])
    for args in [(0, 1, 0.3), (1, 1, 0.1), (-1, 1, 0.5), (0, 1, 0)]:
        with pytest.raises(ValueError):
            GridSpec(*args)


# ---------------------------------------------------------------- LU


def test_det_identity():
    assert lu_det(np.eye(5)) == 1.0


def test_det_vandermonde_123():
    assert lu_det(vandermonde([1, 2, 3])) == pytest.approx(2.0, rel=1e-14)


def test_det_diagonal():
    assert lu_det(np.diag([2.0, 3.0, 4.0])) == pytest.approx(24.0)


def test_det_singular_is_zero():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert lu_det(a) == 0.0


@pytest.mark.parametrize("N", range(1, 9))
def test_vandermonde_integer_sequences(N):
    g = np.arange(1, N + 1)
    expected = math.prod(g[k] - g[j] for j in range(N) for k in range(j + 1, N))
    assert lu_det(vandermonde(g)) == pytest.approx(expected, rel=1e-9)


def test_vandermonde_random_sequences():
    rng = np.random.default_rng(7)
    for _ in range(20):
        g = np.sort(rng.uniform(0.5, 5, rng.integers(2, 7)))
        expected = math.prod(g[k] - g[j] for j in range(g.size) for k in range(j + 1, g.size))
        assert lu_det(vandermonde(g)) == pytest.approx(expected, rel=1e-9)


@given(hnp.arrays(float, (5, 5), elements=st.floats(-10, 10)))
def test_det_matches_numpy(a):
    ref = np.linalg.det(a)
    assert lu_det(a) == pytest.approx(ref, rel=1e-8, abs=1e-8 * max(1.0, np.abs(a).max()) ** 5)


def test_batched_and_complex():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 3, 6, 6)) + 1j * rng.normal(size=(4, 3, 6, 6))
    assert np.allclose(lu_det(a), np.linalg.det(a), rtol=1e-12)
    phase, logabs = lu_slogdet(a)
    ref_phase, ref_log = np.linalg.slogdet(a)
    assert np.allclose(phase, ref_phase) and np.allclose(logabs, ref_log)


def test_lu_reconstructs_matrix():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(6, 6))
    lu, perm, _ = lu_factor(a)
    L = np.tril(lu, -1) + np.eye(6)
    U = np.triu(lu)
    assert np.allclose(L @ U, a[perm])


def test_slogdet_singular():
    phase, logabs = lu_slogdet(np.zeros((3, 3)))
    assert phase == 0 and logabs == -np.inf


def test_lu_factor_rejects_non_square():
    with pytest.raises(ValueError):
        lu_factor(np.zeros((2, 3)))


# ---------------------------------------------------------------- solve


def test_solve_identity():
    b = np.array([1.0, -2.0, 3.5])
    assert np.array_equal(lin_solve(np.eye(3), b), b)


def test_solve_scalar_overlap():
    r = 0.9
    phi = lin_solve(np.array([[np.tanh(r) ** 3]]), np.array([-math.sqrt(3) * np.tanh(r) / np.cosh(r)]))
    assert phi[0] == pytest.approx(-math.sqrt(3) / (np.tanh(r) * np.sinh(r)), rel=1e-14)


def test_solve_residual():
    rng = np.random.default_rng(5)
    for _ in range(20):
        q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
        a = q @ np.diag(rng.uniform(1, 10, 6)) @ q.T
        b = rng.normal(size=6)
        x = lin_solve(a, b)
        assert np.max(np.abs(a @ x - b)) <= 1e-10 * np.max(np.abs(b))


def test_solve_singular_reports_pivot():
    a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]])
    with pytest.raises(SingularMatrixError) as info:
        lin_solve(a, np.ones(3))
    assert info.value.pivot_index in (1, 2)
    assert isinstance(info.value, np.linalg.LinAlgError)


# ---------------------------------------------------------------- quadrature


def test_integrate_sech2_half_line():
    val, err = integrate(lambda x: 1 / np.cosh(x) ** 2, 0, math.inf)
    assert val == pytest.approx(1.0, abs=1e-12)
    assert err <= 1e-12


def test_integrate_ground_state_norm():
    val, _ = integrate(lambda y: 3 / np.cosh(y) ** 2 * np.tanh(y) ** 2, 0, math.inf)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_integrate_born_kernel():
    val, _ = integrate(lambda r: np.sin(r) ** 2 / np.cosh(r) ** 2, 0, math.inf)
    assert val == pytest.approx(0.5 * (1 - math.pi / math.sinh(math.pi)), abs=1e-12)


@pytest.mark.parametrize("f,a,b", [
    (np.exp, 0.0, 3.0),
    (lambda x: np.sqrt(x), 0.0, 2.0),
    (lambda x: np.exp(-x) * np.cos(5 * x), 0.0, math.inf),
    (lambda x: 2 * x * x * np.exp(-x) / (1 + np.exp(-2 * x)), 1.0, math.inf),  # x^2 sech x without overflow
])
def test_integrate_matches_scipy(f, a, b):
    ref, _ = sci_integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-13, limit=500)
    val, err = integrate(f, a, b, QuadratureSpec(1e-11, 1e-11))
    assert val == pytest.approx(ref, abs=1e-10)


def test_integrate_scalar_only_callable():
    val, _ = integrate(lambda x: math.exp(-x), 0.0, 1.0)
    assert val == pytest.approx(1 - math.exp(-1), abs=1e-14)


def test_integrate_nonconvergence():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1 / x), 1e-9, 1.0, QuadratureSpec(1e-15, 1e-15, 5))
    assert math.isfinite(info.value.estimate) and info.value.error > 0


def test_integrate_empty_interval():
    assert integrate(np.exp, 1.0, 1.0) == (0.0, 0.0)


# ---------------------------------------------------------------- Numerov


@pytest.mark.parametrize("kappa", [0.5, 1.0, 2.0, 5.0])
def test_numerov_free_particle(kappa):
    grid = GridSpec(0.0, 20.0, 1e-3)
    y = numerov_integrate(lambda r: np.full_like(r, -kappa**2), grid, 0.0, math.sin(kappa * 1e-3))
    assert np.max(np.abs(y - np.sin(kappa * grid.nodes()))) <= 1e-7


def test_numerov_sinh():
    grid = GridSpec(0.0, 5.0, 1e-3)
    y = numerov_integrate(lambda r: np.ones_like(r), grid, 0.0, math.sinh(1e-3))
    r = grid.nodes()
    assert np.max(np.abs(y - np.sinh(r)) / np.cosh(r)) < 1e-8


def test_numerov_bound_state():
    # y = sech r solves y'' = (1 - 2 sech^2 r) y; the growing companion
    # solution amplifies the O(h^4) error towards large r
    grid = GridSpec(0.0, 8.0, 1e-3)
    r = grid.nodes()
    y = numerov_integrate(lambda x: 1 - 2 / np.cosh(x) ** 2, grid, 1.0, 1 / math.cosh(1e-3))
    assert np.max(np.abs(y - 1 / np.cosh(r))) < 1e-7


def test_numerov_vectorized_matches_single():
    grid = GridSpec(0.0, 10.0, 1e-2)
    r = grid.nodes()
    kappas = np.array([0.5, 1.5])
    q = -np.broadcast_to(kappas**2, (r.size, 2))
    y = numerov_integrate(q, grid, np.zeros(2), np.sin(kappas * 1e-2))
    for i, k in enumerate(kappas):
        single = numerov_integrate(lambda x: np.full_like(x, -k**2), grid, 0.0, math.sin(k * 1e-2))
        assert np.array_equal(y[:, i], single)


def test_numerov_overflow():
    with pytest.raises(OverflowError):
        numerov_integrate(lambda r: np.full_like(r, 400.0), GridSpec(0.0, 50.0, 1e-2), 0.0, 1e-2)


def test_numerov_rejects_bad_q():
    grid = GridSpec(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        numerov_integrate(np.zeros(2), grid, 0.0, 1.0)
    with pytest.raises(ValueError), np.errstate(divide="ignore"):
        numerov_integrate(lambda r: 1 / r, grid, 0.0, 1.0)


# ---------------------------------------------------------------- finite differences


def test_second_log_derivative_cosh3():
    assert second_log_derivative(lambda x: np.cosh(x) ** 3, 0.7, 1e-3) == pytest.approx(
        3 / math.cosh(0.7) ** 2, abs=1e-8)


@pytest.mark.parametrize("x", [-1.3, 0.0, 0.4, 2.2])
def test_second_log_derivative_gaussian(x):
    assert second_log_derivative(lambda t: np.exp(t * t), x, 1e-3) == pytest.approx(2.0, abs=1e-7)


def test_second_log_derivative_det_m_two():
    # det of the two-column Wronskian matrix is 2 cosh^3 x
    def det2(x):
        return np.cosh(x) * np.cosh(2 * x) * 2 - np.sinh(x) * np.sinh(2 * x)

    for x in (0.3, 1.1, 2.5):
        assert second_log_derivative(det2, x) == pytest.approx(3 / math.cosh(x) ** 2, abs=1e-7)


def test_second_log_derivative_domain():
    with pytest.raises(ValueError):
        second_log_derivative(lambda x: x, 0.001, 1e-3)


def test_central_derivative():
    assert central_derivative(np.sin, 0.3, 1e-3) == pytest.approx(math.cos(0.3), abs=1e-12)
