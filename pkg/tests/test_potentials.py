import math
import warnings

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st
from scipy import integrate as sci_integrate
from scipy.special import lpmv

from susyqm.numerics import GridSpec, central_second_derivative, numerov_integrate
from susyqm.potentials import (
    SMALL_R_WARNING,
    PotentialKind,
    PotentialModel,
    RepresentationMismatch,
    appendix_derivative_form,
    appendix_eigenstate,
    bound_state,
    bound_state_complex,
    bound_state_derivative,
    bound_state_set,
    complex_shift_check,
    eigenstate_sum_potential,
    eval_potential,
    ladder_descend,
    legendre_square_sum,
    partner_state,
    partner_state_derivative,
)
from susyqm.soliton_matrices import DetSystem
from susyqm.special_functions import bound_state_normalizer, full_line_normalizer

SQRT3 = math.sqrt(3.0)


def scipy_legendre(n, m, z):
    """Oracle for the inside branch: lpmv uses (z^2 - 1)^n, we use (1 - z^2)^n."""
    return (-1) ** n * lpmv(m, n, z)


# ---------------------------------------------------------------- potentials


def test_deep_potential_at_origin():
    assert eval_potential(PotentialModel.deep(1), 0.0) == -6.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pair_strengths(n):
    r = np.linspace(0.1, 6, 30)
    lam = 2 * n * (2 * n + 1)
    assert np.allclose(eval_potential(PotentialModel.deep(n), r), -lam / np.cosh(r) ** 2, rtol=1e-15)
    assert np.allclose(eval_potential(PotentialModel.singular(n), r), lam / np.sinh(r) ** 2, rtol=1e-15)


def test_singular_potential_rejects_origin():
    with pytest.raises(ValueError):
        eval_potential(PotentialModel.singular(1), 0.0)
    with pytest.raises(ValueError):
        eval_potential(PotentialModel.singular(1), np.array([0.5, 0.0]))


def test_singular_potential_inverse_square_core():
    r = np.array([1e-2, 1e-3, 1e-4])
    v = eval_potential(PotentialModel.singular(1), r)
    # 6/sinh^2 r = 6/r^2 - 2 + O(r^2)
    assert np.allclose(v - 6 / r**2, -2.0, atol=1e-3)


def test_determinant_potential_matches_deep_at_one():
    v = eval_potential(PotentialModel.from_determinant(DetSystem.deep(2)), 1.0)
    assert v == pytest.approx(-6 / math.cosh(1.0) ** 2, abs=1e-9)


@pytest.mark.parametrize("N", range(1, 9))
def test_determinant_potential_equals_sech2(N):
    r = np.linspace(0.0, 10.0, 41)
    v = eval_potential(PotentialModel.from_determinant(DetSystem.deep(N)), r)
    assert np.max(np.abs(v + N * (N + 1) / np.cosh(r) ** 2)) <= 1e-6


def test_model_metadata():
    m = PotentialModel.deep(2)
    assert m.kind is PotentialKind.DEEP_SECH2
    assert m.strength == 20
    assert m.boundstate_count == 2
    assert PotentialModel.deep(0).strength == 0  # free particle
    with pytest.raises(ValueError):
        PotentialModel.deep(-1)
    with pytest.raises(ValueError):
        PotentialModel(PotentialKind.DETERMINANT_BUILT)


def test_model_is_callable():
    m = PotentialModel.singular(2)
    assert m(1.3) == eval_potential(m, 1.3)


# ---------------------------------------------------------------- bound states


def test_n1_bound_state_closed_form():
    r = np.linspace(0, 8, 50)
    assert np.allclose(bound_state(1, 1, r), -SQRT3 * np.tanh(r) / np.cosh(r), atol=1e-15)


def test_n2_first_state_against_scipy():
    z = math.tanh(1.0)
    expected = bound_state_normalizer(2, 1) * scipy_legendre(4, 1, z)
    assert bound_state(2, 1, 1.0) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_bound_states_vanish_at_origin(n):
    for j in range(1, n + 1):
        assert bound_state(n, j, 0.0) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bound_state_rejects_bad_index(n):
    with pytest.raises(ValueError):
        bound_state(n, 0, 1.0)
    with pytest.raises(ValueError):
        bound_state(n, n + 1, 1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_orthonormal_on_half_line(n):
    for j in range(1, n + 1):
        for k in range(j, n + 1):
            val, _ = sci_integrate.quad(lambda r: bound_state(n, j, r) * bound_state(n, k, r), 0, 40,
                                        epsabs=1e-13, epsrel=1e-13, limit=200)
            assert val == pytest.approx(float(j == k), abs=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bound_state_derivative_matches_sympy(n):
    r = sp.Symbol("r")
    z = sp.tanh(r)
    for j in range(1, n + 1):
        m = 2 * j - 1
        # Rodrigues form with sqrt(1 - tanh^2) = sech
        poly = sp.diff((1 - sp.Symbol("z") ** 2) ** (2 * n), sp.Symbol("z"), 2 * n + m)
        expr = ((-1) ** m * sp.sech(r) ** m / (2 ** (2 * n) * sp.factorial(2 * n))
                * poly.subs(sp.Symbol("z"), z) * bound_state_normalizer(n, j))
        d = sp.lambdify(r, sp.diff(expr, r), "numpy")
        xs = np.linspace(0.0, 5.0, 17)
        assert np.allclose(bound_state_derivative(n, j, xs), d(xs), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_schroedinger_residual_by_numerov(n):
    # start from the closed form at the first step and march outwards; beyond
    # r ~ 3 the growing e^{gamma r} companion swamps the decaying state
    grid = GridSpec(0.0, 3.0, 1e-3)
    r = grid.nodes()
    for j in range(1, n + 1):
        g = 2 * j - 1
        y = numerov_integrate(lambda x: g * g - 2 * n * (2 * n + 1) / np.cosh(x) ** 2, grid,
                              0.0, bound_state(n, j, grid.step))
        assert np.max(np.abs(y - bound_state(n, j, r))) <= 1e-6


# ---------------------------------------------------------------- partner states


def test_n1_partner_closed_form():
    r = np.linspace(0.2, 8, 50)
    assert np.allclose(partner_state(1, 1, r), -SQRT3 / (np.tanh(r) * np.sinh(r)), rtol=1e-14)


def test_n1_partner_small_r_divergence():
    r = np.array([1e-2, 3e-3])
    # coth r / sinh r = 1/r^2 + 1/6 + O(r^2)
    assert np.allclose(partner_state(1, 1, r) * r**2, -SQRT3 * (1 + r**2 / 6), rtol=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_partner_matches_bound_state_asymptotically(n):
    for j in range(1, n + 1):
        ratio = partner_state(n, j, 18.0) / bound_state(n, j, 18.0)
        assert ratio == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_partner_solves_singular_equation(n):
    r = np.linspace(0.5, 10, 60)
    for j in range(1, n + 1):
        g = 2 * j - 1
        phi = partner_state(n, j, r)
        res = central_second_derivative(lambda x: partner_state(n, j, x), r, 1e-3)
        res = res - (2 * n * (2 * n + 1) / np.sinh(r) ** 2 + g * g) * phi
        assert np.max(np.abs(res) / np.abs(phi)) <= 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_partner_against_mpmath_outside_branch(n):
    r = np.linspace(0.3, 4, 9)
    for j in range(1, n + 1):
        # mpmath's type-3 function is (y^2 - 1)^(m/2) d^m P_n(y) for y > 1
        expected = [-bound_state_normalizer(n, j) * float(mpmath.legenp(2 * n, 2 * j - 1, mpmath.coth(x), type=3))
                    for x in r]
        assert np.allclose(partner_state(n, j, r), expected, rtol=1e-11)


def test_partner_derivative_matches_finite_difference():
    r = np.linspace(0.4, 6, 20)
    for j in (1, 2, 3):
        fd = (partner_state(3, j, r + 1e-5) - partner_state(3, j, r - 1e-5)) / 2e-5
        assert np.allclose(partner_state_derivative(3, j, r), fd, rtol=1e-7)


def test_partner_domain():
    with pytest.raises(ValueError):
        partner_state(1, 1, 0.0)
    with pytest.raises(ValueError):
        partner_state(2, 1, -1.0)


def test_partner_small_r_warning():
    with pytest.warns(RuntimeWarning):
        partner_state(2, 1, SMALL_R_WARNING / 2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        partner_state(2, 1, SMALL_R_WARNING * 2)


def test_bound_state_set_pairs_by_energy():
    s = bound_state_set(3)
    assert s.gammas == (1, 3, 5)
    assert s.energies == (-1, -9, -25)
    assert s.partner_labels == {3: 1, 2: 2, 1: 3}
    r = np.array([0.7, 2.0])
    assert s.states(r).shape == (3, 2)
    assert np.allclose(s.partners(r)[1], partner_state(3, 2, r))
    with pytest.raises(ValueError):
        bound_state_set(0)


# ---------------------------------------------------------------- eigenstate sums


def test_square_sum_n2_example():
    z = np.linspace(-0.95, 0.95, 21)
    p21, p22 = scipy_legendre(2, 1, z), scipy_legendre(2, 2, z)
    explicit = 4 * (1 * (1 / 6) * p21**2 + 4 * (1 / 24) * p22**2)
    assert np.allclose(explicit, 6 * (1 - z**2), atol=1e-14)
    assert np.allclose(legendre_square_sum(2, z), explicit, atol=1e-14)


@pytest.mark.parametrize("N", range(1, 11))
def test_square_sum_identity(N):
    z = np.linspace(-1, 1, 202)[1:-1]
    assert np.max(np.abs(legendre_square_sum(N, z) - N * (N + 1) * (1 - z * z))) <= 1e-9


def test_square_sum_at_unit_argument_limit():
    for N in (1, 4, 7):
        assert abs(legendre_square_sum(N, 1 - 1e-15)) < 1e-12


def test_square_sum_n5_scipy():
    z = 0.3
    total = 4 * sum(m * m * math.factorial(5 - m) / math.factorial(5 + m) * scipy_legendre(5, m, z) ** 2
                    for m in range(1, 6))
    assert total == pytest.approx(30 * 0.91, rel=1e-13)


@pytest.mark.parametrize("N", [1, 2, 5, 8])
def test_eigenstate_sum_reproduces_potential(N):
    x = np.linspace(-6, 6, 61)
    assert np.allclose(eigenstate_sum_potential(N, x), -N * (N + 1) / np.cosh(x) ** 2, atol=1e-10)


@given(st.integers(1, 10), st.floats(-0.999, 0.999))
def test_square_sum_property(N, z):
    assert legendre_square_sum(N, z) == pytest.approx(N * (N + 1) * (1 - z * z), abs=1e-9)


# ---------------------------------------------------------------- complex shift


def test_n1_shift_phase_is_i():
    r = np.linspace(0.2, 5, 30)
    c = complex_shift_check(1, 1, r)
    assert np.allclose(c.modulus_ratio, 1.0, atol=1e-12)
    assert c.fitted_phase == pytest.approx(1j, abs=1e-12)
    # Phi_1(r) = i Psi_1(r + i pi/2) pointwise
    assert np.allclose(partner_state(1, 1, r), 1j * bound_state_complex(1, 1, r + 0.5j * math.pi), atol=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_shift_modulus_and_constant_phase(n):
    r = np.linspace(0.3, 6, 40)
    for j in range(1, n + 1):
        c = complex_shift_check(n, j, r)
        assert np.max(np.abs(c.modulus_ratio - 1)) <= 1e-8
        assert c.phase_deviation <= 1e-8
        assert abs(abs(c.fitted_phase) - 1) < 1e-14


def test_shift_phase_alternates_with_order():
    # the phase is -i^{-m} for superscript m = 2j - 1
    for n in (2, 3):
        for j in range(1, n + 1):
            c = complex_shift_check(n, j, np.linspace(0.5, 3, 10))
            assert c.fitted_phase == pytest.approx(-(1j ** -(2 * j - 1)), abs=1e-12)


def test_shift_rejects_nonpositive_r():
    with pytest.raises(ValueError):
        complex_shift_check(1, 1, [0.0, 1.0])


# ---------------------------------------------------------------- ladder


def test_ladder_single_rung():
    chain = ladder_descend(1)
    assert chain.strengths == (2, 0)
    assert chain.ground_exponents == (1,)


def test_ladder_three_rungs():
    chain = ladder_descend(3)
    assert chain.strengths == (12, 6, 2, 0)
    assert chain.ground_exponents == (3, 2, 1)
    assert chain.xi_exponent == 6


@pytest.mark.parametrize("N", range(1, 9))
def test_ladder_xi_exponent(N):
    chain = ladder_descend(N)
    assert chain.xi_exponent == N * (N + 1) // 2
    x = np.linspace(-3, 3, 7)
    assert np.allclose(chain.xi(x), np.prod([chain.ground_state(i, x) for i in range(N)], axis=0))


def test_ladder_xi_for_two():
    x = np.linspace(-2, 2, 9)
    assert np.allclose(ladder_descend(2).xi(x), np.cosh(x) ** -3)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_ladder_rungs_by_finite_difference(N):
    chain = ladder_descend(N)
    x = np.linspace(-3, 3, 13)
    for i in range(N):
        k = chain.ground_exponents[i]
        log_xi = lambda t, k=k: -k * np.log(np.cosh(t))
        partner = chain.potential(i, x) - 2 * central_second_derivative(log_xi, x, 1e-3)
        # five-point stencil: roundoff ~ eps/h^2 dominates
        assert np.allclose(partner, chain.potential(i + 1, x), atol=1e-7)
        # ground state energy -k^2
        xi = chain.ground_state(i, x)
        lhs = -central_second_derivative(lambda t, k=k: np.cosh(t) ** -k, x, 1e-3) + chain.potential(i, x) * xi
        assert np.allclose(lhs, -k * k * xi, atol=1e-7)


def test_ladder_rejects_zero():
    with pytest.raises(ValueError):
        ladder_descend(0)


# ---------------------------------------------------------------- derivative representation


def _sympy_ladder_state(N, j):
    x = sp.Symbol("x")
    f = sp.cosh(x) ** (2 * j - 2 * N)
    for _ in range(j):
        f = sp.diff(f / sp.cosh(x), x)
    norm = sp.factorial2(2 * N - 2 * j - 1) * sp.sqrt(sp.Rational(N - j) / (sp.factorial(2 * N - j) * sp.factorial(j)))
    return sp.lambdify(x, norm * sp.cosh(x) ** N * f, "numpy")


@pytest.mark.parametrize("N,j", [(2, 1), (3, 2), (4, 3), (5, 2)])
def test_derivative_form_against_sympy(N, j):
    x = np.linspace(-3, 3, 50)
    assert np.allclose(appendix_derivative_form(N, j, x), _sympy_ladder_state(N, j)(x), atol=1e-12)


@pytest.mark.parametrize("N", range(1, 9))
def test_representations_agree(N):
    x = np.linspace(-5, 5, 81)
    for j in range(N):
        leg = appendix_eigenstate(N, j, x)
        assert np.max(np.abs(leg - appendix_derivative_form(N, j, x))) <= 1e-8


@pytest.mark.parametrize("N", range(1, 8))
def test_ladder_ground_state_normalization(N):
    x = np.linspace(-4, 4, 9)
    from susyqm.special_functions import ground_state_normalizer

    assert np.allclose(np.abs(appendix_eigenstate(N, 0, x)), ground_state_normalizer(N) / np.cosh(x) ** N,
                       rtol=1e-12)


@pytest.mark.parametrize("N", [2, 3, 5])
def test_full_line_states_normalized(N):
    for j in range(N):
        m = N - j
        val, _ = sci_integrate.quad(lambda t: appendix_eigenstate(N, j, t) ** 2, -40, 40, epsabs=1e-13, limit=200)
        assert val == pytest.approx(1.0, abs=1e-9)
        assert full_line_normalizer(N, m) > 0


def test_odd_states_vanish_at_origin():
    # P_N^{N-j}(tanh x) carries a degree-j polynomial in tanh x, so parity is (-1)^j
    for N in range(1, 9):
        for j in range(N):
            x = np.array([0.4, 1.3])
            assert np.allclose(appendix_eigenstate(N, j, -x), (-1) ** j * appendix_eigenstate(N, j, x), atol=1e-15)
            if j % 2:
                assert abs(appendix_eigenstate(N, j, 0.0)) < 1e-15


def test_representation_mismatch_is_raised():
    with pytest.raises(RepresentationMismatch):
        appendix_eigenstate(4, 1, np.linspace(-1, 1, 5), tol=-1.0)


def test_appendix_index_range():
    with pytest.raises(ValueError):
        appendix_eigenstate(3, 3, 0.1)
    with pytest.raises(ValueError):
        appendix_derivative_form(3, -1, 0.1)
