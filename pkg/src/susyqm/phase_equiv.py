"""
Removing every bound state of -2n(2n+1) sech^2 r.

With F_jk(r) = int_0^r Psi_j Psi_k, the phase-equivalent partner is
V_d - 2 (ln det F)'' = +2n(2n+1) cosech^2 r, its solutions at the removed
energies solve F Phi = Psi, and (ln det F)' = sum_j Psi_j Phi_j.

Each product Psi_j Psi_k is (1 - z^2)^((m_j+m_k)/2 - 1) times a polynomial in
z = tanh r after the change dr = dz/(1 - z^2), so F has an exact polynomial
antiderivative.  That keeps F accurate near r = 0 where it vanishes like
r^(m_j+m_k+1) and the linear solve is at its worst.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .numerics import (
    QuadratureSpec,
    central_derivative,
    central_second_derivative,
    integrate,
    lin_solve,
    lu_slogdet,
)
from .potentials import (
    PotentialModel,
    bound_state,
    bound_state_derivative,
    eval_potential,
    partner_state,
)
from .scattering import scatter_state_det
from .soliton_matrices import DetSystem
from .special_functions import (
    bound_state_normalizer,
    factorial_ratio,
    legendre_inside,
    legendre_outside,
    legendre_poly_coeffs,
)

__all__ = [
    "OverlapMatrix",
    "overlap_matrix",
    "log_det_overlap",
    "singular_from_deep",
    "partner_states_solve",
    "logdet_derivative_identity",
    "product_sum_identity",
    "legendre_product_identity",
    "general_wavefunction_transform",
    "wronskian_wavefunction_transform",
    "is_positive_definite",
    "overlap_pivots",
    "overlap_is_positive_definite",
    "R_SOLVE_MIN",
]

R_SOLVE_MIN = 1e-2


@dataclass(frozen=True)
class OverlapMatrix:
    n: int
    r: float
    entries: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))

    def condition_number(self) -> float:
        return float(np.linalg.cond(self.entries))


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for k, y in enumerate(b):
            out[i + k] += x * y
    return out


@lru_cache(maxsize=None)
def _overlap_antiderivative_exact(n: int, j: int, k: int) -> tuple:
    """Ascending coefficients of the z-antiderivative (zero at z = 0) of
    Psi_j Psi_k / (alpha_j alpha_k)  with dr = dz/(1 - z^2)."""
    mj, mk = 2 * j - 1, 2 * k - 1
    prod = _poly_mul(legendre_poly_coeffs(2 * n, mj), legendre_poly_coeffs(2 * n, mk))
    # (1 - z^2)^e, e = (mj + mk)/2 - 1
    e = (mj + mk) // 2 - 1
    weight = [Fraction(0)] * (2 * e + 1)
    for i in range(e + 1):
        weight[2 * i] = Fraction(math.comb(e, i) * (-1) ** i)
    integrand = _poly_mul(prod, weight)
    return tuple([Fraction(0)] + [c / (p + 1) for p, c in enumerate(integrand)])


@lru_cache(maxsize=None)
def _overlap_antiderivative(n: int, j: int, k: int) -> np.ndarray:
    return np.array([float(c) for c in _overlap_antiderivative_exact(n, j, k)])


def _horner(coeffs, x):
    acc = np.full(np.shape(x), coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def _overlap_exact(n, r):
    z = np.tanh(np.asarray(r, dtype=float))
    F = np.empty(z.shape + (n, n))
    for j in range(1, n + 1):
        for k in range(j, n + 1):
            a = bound_state_normalizer(n, j) * bound_state_normalizer(n, k)
            F[..., j - 1, k - 1] = F[..., k - 1, j - 1] = a * _horner(_overlap_antiderivative(n, j, k), z)
    return F


def overlap_matrix(n: int, r: float, method: str = "exact", spec: QuadratureSpec | None = None) -> OverlapMatrix:
    """F_jk(r) = int_0^r Psi_j(y) Psi_k(y) dy.

    ``method="exact"`` integrates the polynomial form; ``"quadrature"`` uses
    adaptive Gauss-Kronrod on the closed-form bound states.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if method == "exact":
        return OverlapMatrix(n, float(r), _overlap_exact(n, float(r)))
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    spec = spec or QuadratureSpec(abs_tol=1e-14, rel_tol=1e-13)
    F = np.zeros((n, n))
    for j in range(1, n + 1):
        for k in range(j, n + 1):
            val, _ = integrate(lambda y: bound_state(n, j, y) * bound_state(n, k, y), 0.0, float(r), spec)
            F[j - 1, k - 1] = F[k - 1, j - 1] = val
    return OverlapMatrix(n, float(r), F)


@lru_cache(maxsize=None)
def _odd_basis(n: int) -> np.ndarray:
    """B with Psi_j = alpha_j sech(r) sum_i B_ji z^(2i-1), z = tanh r.

    sqrt(1 - z^2)^m p(z) = sech(r) (1 - z^2)^((m-1)/2) p(z), and the
    polynomial factor is odd of degree 2n - 1 for every odd m.
    """
    B = np.zeros((n, n))
    for j in range(1, n + 1):
        m = 2 * j - 1
        e = (m - 1) // 2
        weight = [Fraction(0)] * (2 * e + 1)
        for i in range(e + 1):
            weight[2 * i] = Fraction(math.comb(e, i) * (-1) ** i)
        q = _poly_mul(legendre_poly_coeffs(2 * n, m), weight)
        q += [Fraction(0)] * (2 * n - len(q))
        if any(q[0::2]):
            raise AssertionError("expected an odd polynomial")
        B[j - 1] = [float(c) for c in q[1::2]]
    return B


def _gram_monomials(n, z):
    """G_ik = int_0^r sech^2 z^(2i-1) z^(2k-1) dr = z^(2i+2k-1)/(2i+2k-1), equilibrated.

    With d_i = sqrt(G_ii) the scaled matrix G / (d d^T) does not depend on z
    at all, so the whole r-dependence sits in the diagonal factor.
    Returns (scaled, d).
    """
    i = np.arange(1, n + 1)
    c = 4.0 * i - 1
    scaled = np.sqrt(c[:, None] * c[None, :]) / (2 * i[:, None] + 2 * i[None, :] - 1)
    d = np.asarray(z, dtype=float)[..., None] ** (2 * i - 0.5) / np.sqrt(c)
    return scaled, d


def _alphas(n):
    return np.array([bound_state_normalizer(n, j) for j in range(1, n + 1)])


def log_det_overlap(n: int, r):
    """ln det F(r); vectorized over r.

    Evaluated through F = A G A^T (see ``_odd_basis``) so that the rank
    deficiency of F near r = 0 never reaches the LU factorization.
    """
    z = np.tanh(np.asarray(r, dtype=float))
    if np.any(z <= 0):
        raise ValueError("det F vanishes at r = 0")
    scaled, d = _gram_monomials(n, z)
    phase, logabs = lu_slogdet(scaled)
    if np.any(np.asarray(phase) <= 0):
        raise ValueError("det F is not positive")
    _, log_b = lu_slogdet(_odd_basis(n))
    const = 2 * (np.log(_alphas(n)).sum() + log_b)
    return logabs + 2 * np.log(d).sum(axis=-1) + const


def _fd_step(r):
    # ln det F ~ n(2n+1) ln r near 0: keep the stencil well inside (0, r)
    return min(1e-3, 2.5e-3 * r)


def singular_from_deep(n: int, r, h: float | None = None):
    """V_d(r) - 2 (ln det F)''(r) with a five-point second difference.

    Equals +2n(2n+1) cosech^2 r.
    """
    r = float(r)
    if not r > 0:
        raise ValueError("det F vanishes at r = 0; need r > 0")
    h = h or _fd_step(r)
    if r - 2 * h <= 0:
        raise ValueError("stencil reaches r <= 0; reduce h")
    second = central_second_derivative(lambda x: log_det_overlap(n, x), r, h)
    return float(eval_potential(PotentialModel.deep(n), r) - 2 * second)


def partner_states_solve(n: int, r: float, return_cond: bool = False):
    """Phi(r) from F(r) Phi(r) = Psi(r).

    Restricted to r >= 1e-2 where F is still comfortably invertible.
    """
    if r < R_SOLVE_MIN:
        raise ValueError(f"F(r) is too ill-conditioned below r = {R_SOLVE_MIN}")
    # F Phi = Psi  with  F = A G A^T,  Psi = sech(r) A u,  u_i = z^(2i-1)
    # reduces to  G (A^T Phi) = sech(r) u,  solved in the equilibrated basis
    z = math.tanh(r)
    scaled, d = _gram_monomials(n, z)
    u = z ** (2 * np.arange(1, n + 1) - 1.0)
    y = lin_solve(scaled, u / d / math.cosh(r)) / d
    phi = lin_solve(_odd_basis(n).T, y) / _alphas(n)
    if return_cond:
        return phi, float(np.linalg.cond(_overlap_exact(n, float(r))))
    return phi


def logdet_derivative_identity(n: int, r: float, h: float | None = None) -> float:
    """|(ln det F)'(r) - sum_j Psi_j Phi_j| with a five-point first difference."""
    r = float(r)
    if not r > 0:
        raise ValueError("need r > 0")
    h = h or _fd_step(r)
    fd = central_derivative(lambda x: log_det_overlap(n, x), r, h)
    s = sum(bound_state(n, j, r) * partner_state(n, j, r) for j in range(1, n + 1))
    return float(abs(fd - s))


def _working_digits(n, z):
    # terms reach ~z^(1-2n) times coefficients up to ~(4n)!/(2n)!; the sum is ~1/z
    lost = (2 * n) * math.log10(1 / float(z)) + math.lgamma(4 * n + 1) / math.log(10)
    return 20 + int(lost)


def _extended_sum(n, z, sech, cosech):
    """-sum_j alpha_j^2 P_{2n}^m(z) P_{2n}^m(1/z) for mpmath arguments."""
    total = mpmath.mpf(0)
    for m in range(1, 2 * n, 2):
        w = 2 * m * factorial_ratio(2 * n - m, 2 * n + m)
        weight = mpmath.mpf(w.numerator) / w.denominator
        total += weight * legendre_inside((2 * n, m), z, root=sech) * legendre_outside((2 * n, m), 1 / z, root=cosech)
    return -total


def _map_scalar(fn, x):
    x = np.asarray(x, dtype=float)
    out = np.array([fn(float(v)) for v in x.ravel()]).reshape(x.shape)
    return out[()] if out.ndim == 0 else out


def product_sum_identity(n: int, r):
    """(n(2n+1)/(sinh r cosh r), sum_j Psi_j(r) Phi_j(r)).

    The terms of the sum grow like r^(1-2n) and cancel down to ~1/r, so the
    closed forms are evaluated in mpmath at a precision sized to the
    cancellation and rounded back to double.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("need r > 0")
    lhs = n * (2 * n + 1) / (np.sinh(r) * np.cosh(r))

    def one(v):
        with mpmath.workdps(_working_digits(n, math.tanh(v))):
            x = mpmath.mpf(v)
            return float(_extended_sum(n, mpmath.tanh(x), 1 / mpmath.cosh(x), 1 / mpmath.sinh(x)))

    return lhs, _map_scalar(one, r)


def legendre_product_identity(n: int, z):
    """(n(2n+1)(1 - z^2)/z,  -sum_{m odd} P_{2n}^m(z) P_{2n}^m(1/z) 2m (2n-m)!/(2n+m)!) for 0 < z < 1.

    Float input is evaluated in mpmath (see ``product_sum_identity``) and
    returned as float; mpmath input is used at the caller's precision.
    """
    if type(z).__module__.startswith("mpmath"):
        if not 0 < z < 1:
            raise ValueError("need 0 < z < 1")
        lhs = n * (2 * n + 1) * (1 - z * z) / z
        return lhs, _extended_sum(n, z, mpmath.sqrt(1 - z * z), mpmath.sqrt(1 - z * z) / z)
    z = np.asarray(z, dtype=float)
    if np.any((z <= 0) | (z >= 1)):
        raise ValueError("need 0 < z < 1")
    lhs = n * (2 * n + 1) * (1 - z * z) / z

    def one(v):
        with mpmath.workdps(_working_digits(n, v)):
            x = mpmath.mpf(v)
            root = mpmath.sqrt(1 - x * x)
            return float(_extended_sum(n, x, root, root / x))

    return lhs, _map_scalar(one, z)


# ---------------------------------------------------------------- wavefunctions


def general_wavefunction_transform(n: int, kappa: float, r: float, spec: QuadratureSpec | None = None) -> float:
    """Phi(kappa, r) = Psi(kappa, r) - sum_j Phi_j(r) int_0^r Psi_j(y) Psi(kappa, y) dy,

    with Psi the determinant scattering state of the deep potential.
    """
    if not (r > 0 and kappa > 0):
        raise ValueError("need r > 0 and kappa > 0")
    # det D / det M carries ~1e-13 relative noise for 2n = 6 and grows like
    # prod |j - i kappa|, so an absolute floor far below that cannot be met
    spec = spec or QuadratureSpec(abs_tol=1e-9, rel_tol=1e-11)
    sys = DetSystem.deep(2 * n)
    out = float(scatter_state_det(sys, kappa, r))
    for j in range(1, n + 1):
        val, _ = integrate(lambda y: bound_state(n, j, y) * scatter_state_det(sys, kappa, y), 0.0, float(r), spec)
        out -= float(partner_state(n, j, r)) * val
    return out


def wronskian_wavefunction_transform(n: int, kappa: float, r: float) -> float:
    """Same Phi(kappa, r) with the overlap integrals replaced by Wronskians:
    int_0^r Psi_j Psi = -(Psi_j Psi' - Psi Psi_j') / (gamma_j^2 + kappa^2)."""
    if not (r > 0 and kappa > 0):
        raise ValueError("need r > 0 and kappa > 0")
    psi, dpsi = scatter_state_det(DetSystem.deep(2 * n), kappa, r, derivative=True)
    out = float(psi)
    for j in range(1, n + 1):
        g = 2 * j - 1
        w = bound_state(n, j, r) * dpsi - psi * bound_state_derivative(n, j, r)
        out += float(partner_state(n, j, r) * w / (g * g + kappa**2))
    return out


def overlap_pivots(n: int, r: float) -> list:
    """Elimination pivots of F(r) / (alpha alpha^T) in exact rational arithmetic.

    z = tanh(r) is taken as the exact binary fraction of its double, so
    the pivots belong to a matrix within rounding of F(r) and carry no
    further error.  Near r = 0 det F ~ r^(n(2n+1)) and float elimination
    cannot resolve the smallest pivots; this can.  Scaling by the positive
    normalizers is a congruence, so the signs match those of F.
    """
    if not r > 0:
        raise ValueError("need r > 0")
    z = Fraction(math.tanh(r))
    a = [[None] * n for _ in range(n)]
    for j in range(n):
        for k in range(j, n):
            acc = Fraction(0)
            for c in reversed(_overlap_antiderivative_exact(n, j + 1, k + 1)):
                acc = acc * z + c
            a[j][k] = a[k][j] = acc
    pivots = []
    for p in range(n):
        piv = a[p][p]
        pivots.append(piv)
        if piv == 0:
            break
        for i in range(p + 1, n):
            f = a[i][p] / piv
            for k in range(p + 1, n):
                a[i][k] -= f * a[p][k]
    return pivots


def overlap_is_positive_definite(n: int, r: float) -> bool:
    pivots = overlap_pivots(n, r)
    return len(pivots) == n and all(p > 0 for p in pivots)


def is_positive_definite(F) -> bool:
    """All LU pivots positive (no pivoting needed for symmetric PD matrices)."""
    F = np.asarray(F, dtype=float)
    if not np.allclose(F, F.T, rtol=1e-12, atol=0):
        return False
    a = F.copy()
    for k in range(a.shape[0]):
        if a[k, k] <= 0:
            return False
        a[k + 1:, k + 1:] -= np.outer(a[k + 1:, k], a[k, k + 1:]) / a[k, k]
    return True
