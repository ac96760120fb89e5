"""
Associated Legendre functions of integer degree and order.

Both real branches are evaluated from the Rodrigues-type form

    |z| < 1 :  P_n^m(z) = (-1)^m (1 - z^2)^(m/2) / (2^n n!) d^(n+m)/dz^(n+m) (1 - z^2)^n
    y > 1   :  P_n^m(y) =        (y^2 - 1)^(m/2) / (2^n n!) d^(n+m)/dy^(n+m) (y^2 - 1)^n

Note the inner power is (1 - z^2)^n, not (z^2 - 1)^n, so for odd degree the
inside branch differs from the Condon-Shortley convention (scipy.special.lpmv)
by a factor (-1)^n.  Every identity in this package is written for this
convention.

The derivative of the binomial expansion is carried out exactly with
integer arithmetic and cached, so evaluation is a Horner pass over an
explicit polynomial times the (1 - z^2)^(m/2) prefactor.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

__all__ = [
    "LegendreOrder",
    "legendre_inside",
    "legendre_outside",
    "legendre_complex",
    "legendre_poly_coeffs",
    "legendre_factor",
    "double_factorial",
    "factorial_ratio",
    "bound_state_normalizer",
    "ground_state_normalizer",
    "full_line_normalizer",
    "MAX_DOUBLE_FACTORIAL",
]


class LegendreOrder(NamedTuple):
    """Degree ``n`` and order ``m`` of P_n^m, with 0 <= m <= n."""

    n: int
    m: int

    @classmethod
    def of(cls, n, m) -> "LegendreOrder":
        n, m = int(n), int(m)
        if n < 0 or m < 0 or m > n:
            raise ValueError(f"need 0 <= m <= n, got n={n}, m={m}")
        return cls(n, m)


def _order(order) -> LegendreOrder:
    if isinstance(order, LegendreOrder):
        return order
    return LegendreOrder.of(*order)


@lru_cache(maxsize=None)
def legendre_poly_coeffs(n: int, m: int, outside: bool = False) -> tuple[Fraction, ...]:
    """Exact coefficients (ascending powers) of the polynomial factor of P_n^m.

    The inside-branch factor includes the (-1)^m sign; the outside-branch
    factor is d^(n+m)(y^2-1)^n / (2^n n!).
    """
    n, m = LegendreOrder.of(n, m)
    # (1 - z^2)^n = sum_k C(n,k) (-1)^k z^(2k)
    base = [0] * (2 * n + 1)
    for k in range(n + 1):
        base[2 * k] = math.comb(n, k) * (-1) ** k
    if outside:
        base = [c * (-1) ** n for c in base]
    d = n + m
    out = []
    for p in range(d, 2 * n + 1):
        c = base[p]
        if c:
            c *= math.perm(p, d)  # p!/(p-d)!
        out.append(c)
    denom = 2**n * math.factorial(n)
    sign = 1 if outside else (-1) ** m
    return tuple(Fraction(sign * c, denom) for c in out)


@lru_cache(maxsize=None)
def _float_coeffs(n: int, m: int, outside: bool) -> np.ndarray:
    return np.array([float(c) for c in legendre_poly_coeffs(n, m, outside)])


def _is_exact(x) -> bool:
    # Fractions and mpmath numbers keep full precision through Horner
    return isinstance(x, Fraction) or type(x).__module__.startswith("mpmath")


def _horner(coeffs, x):
    acc = coeffs[-1] * x**0
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def _poly(n, m, x, outside):
    if _is_exact(x):
        return _horner(legendre_poly_coeffs(n, m, outside), x)
    return _horner_float(_float_coeffs(n, m, outside), x)


def legendre_factor(order, x, outside=False, derivative=0):
    """Polynomial part p(x) of P_n^m (or its first derivative), without the root prefactor.

    On the inside branch ``P_n^m(z) = (1 - z^2)^(m/2) p(z)`` (p carries the
    (-1)^m sign); outside ``P_n^m(y) = (y^2 - 1)^(m/2) p(y)``.
    """
    n, m = _order(order)
    if derivative not in (0, 1):
        raise ValueError("derivative must be 0 or 1")
    if derivative == 0:
        return _poly(n, m, x, outside)
    coeffs = legendre_poly_coeffs(n, m, outside)
    d = tuple(k * c for k, c in enumerate(coeffs))[1:] or (Fraction(0),)
    if _is_exact(x):
        return _horner(d, x)
    return _horner_float(np.array([float(c) for c in d]), x)


def _horner_float(coeffs, x):
    x = np.asarray(x)
    acc = np.full(x.shape, coeffs[-1], dtype=np.result_type(x, float))
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc if acc.ndim else acc[()]


def _power(root, m):
    return root**m if m else 1


def legendre_inside(order, z, root=None):
    """P_n^m(z) on the cut ``|z| < 1``.

    Parameters
    ----------
    order : LegendreOrder or (n, m)
    z : float or ndarray
        Argument with ``|z| < 1``.
    root : float or ndarray, optional
        Precomputed ``sqrt(1 - z^2)``.  Passing e.g. ``sech(r)`` for
        ``z = tanh(r)`` avoids the cancellation in ``1 - z^2`` at large r.
    """
    n, m = _order(order)
    if not _is_exact(z):
        za = np.asarray(z, dtype=float)
        # with the root supplied, z may have rounded to +-1 (e.g. tanh(30))
        if np.any(np.abs(za) > 1 if root is not None else np.abs(za) >= 1):
            raise ValueError("legendre_inside needs |z| < 1")
        z = za if za.ndim else float(za)
    elif abs(z) >= 1:
        raise ValueError("legendre_inside needs |z| < 1")
    if root is None and m % 2:
        root = _sqrt(1 - z * z)
    prefactor = _power(root, m) if m % 2 else (1 - z * z) ** (m // 2)
    return prefactor * _poly(n, m, z, outside=False)


def legendre_outside(order, y, root=None):
    """P_n^m(y) for ``y > 1`` (no (-1)^m factor on this branch).

    ``root`` optionally supplies ``sqrt(y^2 - 1)``, e.g. ``1/sinh(r)`` for
    ``y = coth(r)``.
    """
    n, m = _order(order)
    if not _is_exact(y):
        ya = np.asarray(y, dtype=float)
        if np.any(ya < 1 if root is not None else ya <= 1):
            raise ValueError("legendre_outside needs y > 1")
        y = ya if ya.ndim else float(ya)
    elif y <= 1:
        raise ValueError("legendre_outside needs y > 1")
    if root is None and m % 2:
        root = _sqrt(y * y - 1)
    prefactor = _power(root, m) if m % 2 else (y * y - 1) ** (m // 2)
    return prefactor * _poly(n, m, y, outside=True)


def legendre_complex(order, w, root=None):
    """Analytic continuation of the inside branch to complex ``w``.

    The prefactor uses the principal square root of ``1 - w^2``, so for odd
    ``m`` the cut runs along real ``w`` with ``|w| > 1``; evaluating exactly on
    it raises ``ValueError``.  Callers who know which continuation they
    want (e.g. ``sech(x)`` for ``w = tanh(x)``) pass it as ``root`` and the cut
    check is skipped.
    """
    n, m = _order(order)
    w = np.asarray(w, dtype=complex)
    if root is None and m % 2:
        on_cut = (w.imag == 0) & (np.abs(w.real) > 1)
        if np.any(on_cut):
            raise ValueError("w lies on the branch cut |Re w| > 1, Im w = 0")
        root = np.sqrt(1 - w * w)
    prefactor = _power(root, m) if m % 2 else (1 - w * w) ** (m // 2)
    out = prefactor * _poly(n, m, w, outside=False)
    return out if np.ndim(out) else complex(out)


def _sqrt(x):
    if _is_exact(x):
        import mpmath

        return mpmath.sqrt(x)
    return np.sqrt(x)


# largest k whose double factorial is still a finite double
MAX_DOUBLE_FACTORIAL = 300


def double_factorial(k: int) -> int:
    """k!! = k (k-2) (k-4) ..., with 0!! = (-1)!! = 1.

    Exact integer.  Raises ``OverflowError`` above ``MAX_DOUBLE_FACTORIAL``,
    where the value no longer converts to a finite float.
    """
    k = int(k)
    if k < -1:
        raise ValueError("double factorial defined for k >= -1")
    if k > MAX_DOUBLE_FACTORIAL:
        raise OverflowError(f"{k}!! exceeds double precision range")
    return math.prod(range(k, 0, -2))


def factorial_ratio(a: int, b: int) -> Fraction:
    """a!/b! as an exact fraction."""
    if a >= b:
        return Fraction(math.prod(range(b + 1, a + 1)))
    return Fraction(1, math.prod(range(a + 1, b + 1)))


def bound_state_normalizer(n: int, j: int) -> float:
    """Half-line normalizer of P_{2n}^{2j-1}(tanh r):
    sqrt(2 (2j-1) (2n+1-2j)! / (2n-1+2j)!).
    """
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= j <= n, got n={n}, j={j}")
    m = 2 * j - 1
    return math.sqrt(2 * m * factorial_ratio(2 * n - m, 2 * n + m))


def full_line_normalizer(N: int, m: int) -> float:
    """Normalizer of P_N^m(tanh x) on the whole line: sqrt(m (N-m)!/(N+m)!)."""
    if not 1 <= m <= N:
        raise ValueError(f"need 1 <= m <= N, got N={N}, m={m}")
    return math.sqrt(m * factorial_ratio(N - m, N + m))


def ground_state_normalizer(N: int) -> float:
    """Whole-line normalizer of cosh^{-N} x: sqrt((2N-1)!! / (2^N (N-1)!))."""
    if N < 1:
        raise ValueError("N must be positive")
    return math.sqrt(Fraction(double_factorial(2 * N - 1), 2**N * math.factorial(N - 1)))
