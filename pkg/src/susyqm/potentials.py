"""
The sech^2 / cosech^2 potential pair, their bound states and partner
solutions, the eigenstate-sum form of reflectionless potentials, the
complex coordinate shift r -> r + i pi/2, and the SUSY ladder that strips
bound states one at a time.

Radial states (half line, strength 2n(2n+1), N = 2n):

    Psi_j(r) = alpha_j P_{2n}^m(tanh r),       m = gamma_j = 2j - 1
    Phi_j(r) = -alpha_j P_{2n}^m(coth r)

Both solve their Schroedinger equation at E = -m^2 and agree as r -> inf.
Full-line states of V_N = -N(N+1) sech^2 x are P_N^m(tanh x) with energy -m^2.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .numerics import second_log_derivative
from .soliton_matrices import SHIFT, DetSystem, log_det_second_derivative
from .special_functions import (
    bound_state_normalizer,
    double_factorial,
    full_line_normalizer,
    legendre_complex,
    legendre_factor,
    legendre_inside,
    legendre_outside,
)

__all__ = [
    "PotentialKind",
    "PotentialModel",
    "eval_potential",
    "BoundStateSet",
    "bound_state",
    "bound_state_derivative",
    "bound_state_complex",
    "partner_state",
    "partner_state_derivative",
    "bound_state_set",
    "eigenstate_sum_potential",
    "legendre_square_sum",
    "ShiftCheck",
    "complex_shift_check",
    "LadderChain",
    "ladder_descend",
    "appendix_derivative_form",
    "appendix_eigenstate",
    "RepresentationMismatch",
    "SMALL_R_WARNING",
]

# partner states blow up like r^(-2n) below this radius
SMALL_R_WARNING = 1e-3


def _sech(x):
    x = np.asarray(x, dtype=float)
    e = np.exp(-np.abs(x))
    out = 2 * e / (1 + e * e)
    return out[()] if out.ndim == 0 else out


def _cosech(r):
    r = np.asarray(r, dtype=float)
    e = np.exp(-np.abs(r))
    out = np.sign(r) * 2 * e / (1 - e * e)
    return out[()] if out.ndim == 0 else out


class PotentialKind(enum.Enum):
    DEEP_SECH2 = "deep_sech2"
    SINGULAR_COSECH2 = "singular_cosech2"
    DETERMINANT_BUILT = "determinant_built"


@dataclass(frozen=True)
class PotentialModel:
    """A potential of one of three kinds.

    ``n`` fixes the strength 2n(2n+1) of the sech^2/cosech^2 pair (``n = 0``
    gives the free particle).  ``system`` is required for determinant-built
    potentials.
    """

    kind: PotentialKind
    n: int = 1
    system: DetSystem | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if self.kind is PotentialKind.DETERMINANT_BUILT and self.system is None:
            raise ValueError("determinant-built potential needs a DetSystem")

    @classmethod
    def deep(cls, n):
        return cls(PotentialKind.DEEP_SECH2, n)

    @classmethod
    def singular(cls, n):
        return cls(PotentialKind.SINGULAR_COSECH2, n)

    @classmethod
    def from_determinant(cls, system: DetSystem):
        return cls(PotentialKind.DETERMINANT_BUILT, system.N // 2, system)

    @property
    def strength(self) -> int:
        return 2 * self.n * (2 * self.n + 1)

    @property
    def boundstate_count(self) -> int:
        if self.kind is PotentialKind.SINGULAR_COSECH2:
            return 0
        if self.kind is PotentialKind.DEEP_SECH2:
            return self.n
        # odd states of the full-line potential
        return 0 if self.system.is_shifted else self.system.N // 2

    def __call__(self, r):
        return eval_potential(self, r)


def eval_potential(model: PotentialModel, r):
    """Value of the potential at ``r`` (scalar or array)."""
    if model.kind is PotentialKind.DEEP_SECH2:
        return -model.strength * _sech(r) ** 2
    if model.kind is PotentialKind.SINGULAR_COSECH2:
        if np.any(np.asarray(r) == 0):
            raise ValueError("the cosech^2 potential is singular at r = 0")
        return model.strength * _cosech(r) ** 2
    return -2 * log_det_second_derivative(model.system, r)


# ---------------------------------------------------------------- radial states


def _check_j(n, j):
    if not 1 <= j <= n:
        raise ValueError(f"need 1 <= j <= n, got n={n}, j={j}")


def bound_state(n: int, j: int, r):
    """Normalized bound state alpha_j P_{2n}^{2j-1}(tanh r), energy -(2j-1)^2."""
    _check_j(n, j)
    m = 2 * j - 1
    return bound_state_normalizer(n, j) * legendre_inside((2 * n, m), np.tanh(r), root=_sech(r))


def bound_state_derivative(n: int, j: int, r):
    _check_j(n, j)
    m = 2 * j - 1
    z, s = np.tanh(r), _sech(r)
    p = legendre_factor((2 * n, m), z)
    dp = legendre_factor((2 * n, m), z, derivative=1)
    return bound_state_normalizer(n, j) * s**m * (s * s * dp - m * z * p)


def bound_state_complex(n: int, j: int, x):
    """Psi_j continued to complex coordinate ``x``, taking sqrt(1 - tanh^2 x) = sech x."""
    _check_j(n, j)
    x = np.asarray(x, dtype=complex)
    return bound_state_normalizer(n, j) * legendre_complex((2 * n, 2 * j - 1), np.tanh(x), root=1 / np.cosh(x))


def _check_partner_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("partner states are defined for r > 0")
    if np.any(r < SMALL_R_WARNING):
        warnings.warn(f"partner state evaluated below r={SMALL_R_WARNING}; values grow like r^(-2n)",
                      RuntimeWarning, stacklevel=3)


def partner_state(n: int, j: int, r):
    """Solution in the cosech^2 potential at the energy of ``bound_state(n, j)``:
    -alpha_j P_{2n}^{2j-1}(coth r)."""
    _check_j(n, j)
    _check_partner_r(r)
    m = 2 * j - 1
    return -bound_state_normalizer(n, j) * legendre_outside((2 * n, m), 1 / np.tanh(r), root=_cosech(r))


def partner_state_derivative(n: int, j: int, r):
    _check_j(n, j)
    _check_partner_r(r)
    m = 2 * j - 1
    y, c = 1 / np.tanh(r), _cosech(r)
    p = legendre_factor((2 * n, m), y, outside=True)
    dp = legendre_factor((2 * n, m), y, outside=True, derivative=1)
    return bound_state_normalizer(n, j) * c**m * (m * y * p + c * c * dp)


@dataclass(frozen=True)
class BoundStateSet:
    """Bound states of the deep potential and the matching singular-potential solutions.

    ``gammas[i]`` is the decay constant shared by ``states[i]`` and
    ``partners[i]``.  The partner list is ordered by energy, so
    ``partners[i]`` pairs with the deep state at ``gamma = 2n+1-2j`` under
    the reversed labelling ``j -> n+1-j``; ``partner_labels`` records that map.
    """

    n: int

    @property
    def gammas(self) -> tuple:
        return tuple(2 * j - 1 for j in range(1, self.n + 1))

    @property
    def energies(self) -> tuple:
        return tuple(-g * g for g in self.gammas)

    @property
    def partner_labels(self) -> dict:
        # reversed-index label j' with gamma = 2n + 1 - 2j'  ->  energy-matched index j
        return {self.n + 1 - j: j for j in range(1, self.n + 1)}

    def states(self, r):
        return np.stack([bound_state(self.n, j, r) for j in range(1, self.n + 1)])

    def state_derivatives(self, r):
        return np.stack([bound_state_derivative(self.n, j, r) for j in range(1, self.n + 1)])

    def partners(self, r):
        return np.stack([partner_state(self.n, j, r) for j in range(1, self.n + 1)])

    def partner_derivatives(self, r):
        return np.stack([partner_state_derivative(self.n, j, r) for j in range(1, self.n + 1)])


def bound_state_set(n: int) -> BoundStateSet:
    if n < 1:
        raise ValueError("n must be positive")
    return BoundStateSet(n)


# ---------------------------------------------------------------- full line


def legendre_square_sum(N: int, z):
    """4 sum_{m=1}^N m^2 (N-m)!/(N+m)! (P_N^m(z))^2, which equals N(N+1)(1 - z^2)."""
    z = np.asarray(z, dtype=float)
    total = np.zeros_like(z)
    for m in range(1, N + 1):
        total = total + m * full_line_normalizer(N, m) ** 2 * legendre_inside((N, m), z) ** 2
    out = 4 * total
    return out[()] if out.ndim == 0 else out


def eigenstate_sum_potential(N: int, x):
    """-4 sum_j gamma_j Psi_j(x)^2 over the whole-line normalized states of
    -N(N+1) sech^2 x, gamma_j = j."""
    x = np.asarray(x, dtype=float)
    z, s = np.tanh(x), _sech(x)
    total = np.zeros_like(z)
    for m in range(1, N + 1):
        psi = full_line_normalizer(N, m) * legendre_inside((N, m), z, root=s)
        total = total + m * psi**2
    out = -4 * total
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- complex shift


class ShiftCheck(NamedTuple):
    modulus_ratio: np.ndarray
    fitted_phase: complex
    phase_deviation: float


def complex_shift_check(n: int, j: int, r) -> ShiftCheck:
    """Compare Phi_j(r) with Psi_j(r + i pi/2) over the radii ``r``.

    Returns |Phi_j| / |Psi_j(r + i pi/2)| per radius, the unit phase c that
    best fits Phi_j = c Psi_j(r + i pi/2) in least squares, and the largest
    deviation of the pointwise ratio from c.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r <= 0):
        raise ValueError("need r > 0")
    phi = partner_state(n, j, r)
    psi = bound_state_complex(n, j, r + SHIFT)
    ratio = np.abs(phi) / np.abs(psi)
    c = np.vdot(psi, phi)
    c = c / abs(c)
    deviation = float(np.max(np.abs(phi / psi - c)))
    return ShiftCheck(ratio, complex(c), deviation)


# ---------------------------------------------------------------- SUSY ladder


@dataclass(frozen=True)
class LadderChain:
    """V_N -> V_{N-1} -> ... -> V_0 by removing ground states cosh^{-k} x.

    ``strengths[i]`` is the coefficient s in -s sech^2 x at rung i (starting
    with N(N+1) and ending with 0); ``ground_exponents[i]`` is k for the
    ground state cosh^{-k} x removed at rung i.
    """

    N: int
    strengths: tuple
    ground_exponents: tuple

    @property
    def xi_exponent(self) -> int:
        # product of removed ground states is cosh^{-xi_exponent}
        return sum(self.ground_exponents)

    def potential(self, rung: int, x):
        return -self.strengths[rung] * _sech(x) ** 2

    def ground_state(self, rung: int, x):
        return np.cosh(x) ** (-self.ground_exponents[rung])

    def xi(self, x):
        return np.cosh(x) ** (-self.xi_exponent)


def ladder_descend(N: int) -> LadderChain:
    """Strip the N bound states of -N(N+1) sech^2 x one ground state at a time.

    For V_k = -k(k+1) sech^2, xi_k = cosh^{-k} x has energy -k^2 and
    -2 (ln xi_k)'' = -2k sech^2, so the partner strength is k(k+1) - 2k.
    Each step is checked to land on (k-1)k and the ground-state equation
    -xi'' + V xi = -k^2 xi is confirmed via its coefficients.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    strengths = [N * (N + 1)]
    exponents = []
    for k in range(N, 0, -1):
        s = strengths[-1]
        # xi = cosh^-k:  xi'' = (k^2 - k(k+1) sech^2) xi
        if s != k * (k + 1):
            raise ArithmeticError(f"rung {k} has strength {s}, expected {k * (k + 1)}")
        log_xi_second = -k  # (ln cosh^-k)'' = -k sech^2
        new = s + 2 * log_xi_second
        if new != (k - 1) * k:
            raise ArithmeticError(f"partner of rung {k} has strength {new}")
        strengths.append(new)
        exponents.append(k)
    chain = LadderChain(N, tuple(strengths), tuple(exponents))
    # numeric spot check of the first rung against the finite-difference log derivative
    x0 = 0.37
    fd = -2 * second_log_derivative(lambda x: np.cosh(x) ** (-N), x0, 1e-3)
    if abs(chain.potential(0, x0) + fd - chain.potential(1, x0)) > 1e-6:
        raise ArithmeticError("ladder step does not reproduce the partner potential")
    return chain


class RepresentationMismatch(AssertionError):
    pass


@lru_cache(maxsize=None)
def _operator_power(N: int, j: int):
    """Terms {(a, b): c} of (d/dx sech)^j cosh^{2j-2N} as sum c tanh^a sech^b."""
    terms = {(0, 2 * N - 2 * j): Fraction(1)}
    for _ in range(j):
        nxt: dict = {}
        for (a, b), c in terms.items():
            b += 1  # multiply by sech
            # d/dx t^a s^b = a t^(a-1) s^(b+2) - b t^(a+1) s^b
            if a:
                key = (a - 1, b + 2)
                nxt[key] = nxt.get(key, 0) + a * c
            key = (a + 1, b)
            nxt[key] = nxt.get(key, 0) - b * c
        terms = {k: v for k, v in nxt.items() if v}
    return tuple(sorted(terms.items()))


def appendix_derivative_form(N: int, j: int, x):
    """Normalized state of -N(N+1) sech^2 at energy -(N-j)^2 from the ladder:

        (2N-2j-1)!! sqrt((N-j)/((2N-j)! j!)) cosh^N x (d/dx sech x)^j cosh^(2j-2N) x
    """
    if not 0 <= j <= N - 1:
        raise ValueError(f"need 0 <= j <= N-1, got N={N}, j={j}")
    x = np.asarray(x, dtype=float)
    t, s = np.tanh(x), _sech(x)
    total = np.zeros_like(t)
    for (a, b), c in _operator_power(N, j):
        total = total + float(c) * t**a * s ** (b - N)
    norm = double_factorial(2 * N - 2 * j - 1) * math.sqrt(
        Fraction(N - j, math.factorial(2 * N - j) * math.factorial(j)))
    out = norm * total
    return out[()] if out.ndim == 0 else out


def appendix_eigenstate(N: int, j: int, x, tol: float = 1e-8):
    """sqrt(j!(N-j)/(2N-j)!) P_N^{N-j}(tanh x), checked against the ladder form.

    Raises ``RepresentationMismatch`` if the two disagree by more than ``tol``.
    """
    if not 0 <= j <= N - 1:
        raise ValueError(f"need 0 <= j <= N-1, got N={N}, j={j}")
    x = np.asarray(x, dtype=float)
    legendre = full_line_normalizer(N, N - j) * legendre_inside((N, N - j), np.tanh(x), root=_sech(x))
    ladder = appendix_derivative_form(N, j, x)
    err = np.max(np.abs(legendre - ladder))
    if err > tol:
        raise RepresentationMismatch(f"N={N}, j={j}: forms differ by {err:.3e}")
    return legendre
