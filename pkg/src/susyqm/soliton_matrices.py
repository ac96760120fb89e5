"""
Determinant machinery for reflectionless potentials.

For decay constants gamma_1 < ... < gamma_N the matrix

    M_kj(x) = gamma_j^(k-1)/2 * (exp(gamma_j x) + (-1)^(j+k) exp(-gamma_j x))

is the Wronskian matrix of cosh/sinh(gamma_j x): row k+1 is the x-derivative
of row k.  The potential is -2 d^2/dx^2 ln det M, and appending the free
solution sin(kappa x) as an extra column (plus one extra row) gives the
scattering state det D / det M.

Entries grow like exp(gamma_j |x|), so builders divide column j by that
factor and hand back the removed amount as a log scale.  Every downstream
quantity is a ratio or a log-derivative, so the factor cancels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import lu_slogdet

__all__ = [
    "GammaSequence",
    "DetSystem",
    "wronskian_rows",
    "sine_derivatives",
    "build_m",
    "build_d_scatter",
    "log_det_m",
    "det_m",
    "log_det_second_derivative",
    "vandermonde_det",
    "closed_form_det_m",
    "closed_form_log_det_m",
    "SHIFT",
]

SHIFT = 0.5j * math.pi


@dataclass(frozen=True)
class GammaSequence:
    """Strictly increasing positive decay constants."""

    gammas: tuple

    def __post_init__(self):
        g = tuple(float(v) for v in self.gammas)
        if not g:
            raise ValueError("need at least one gamma")
        if any(v <= 0 for v in g):
            raise ValueError("gammas must be positive")
        if any(b <= a for a, b in zip(g, g[1:])):
            raise ValueError("gammas must be strictly increasing")
        object.__setattr__(self, "gammas", g)

    @classmethod
    def integers(cls, N: int) -> "GammaSequence":
        return cls(tuple(range(1, N + 1)))

    @property
    def N(self) -> int:
        return len(self.gammas)

    @property
    def closed_form(self) -> bool:
        return self.gammas == tuple(float(j) for j in range(1, self.N + 1))

    def array(self) -> np.ndarray:
        return np.array(self.gammas)


@dataclass(frozen=True)
class DetSystem:
    """A gamma sequence plus a coordinate offset (0, or i*pi/2 for the shifted system)."""

    gamma: GammaSequence
    shift: complex = field(default=0)

    def __post_init__(self):
        if isinstance(self.gamma, (list, tuple)):
            object.__setattr__(self, "gamma", GammaSequence(tuple(self.gamma)))
        if self.shift not in (0, SHIFT):
            raise ValueError("shift must be 0 or i*pi/2")

    @classmethod
    def deep(cls, N: int) -> "DetSystem":
        return cls(GammaSequence.integers(N))

    @classmethod
    def shifted(cls, N: int) -> "DetSystem":
        return cls(GammaSequence.integers(N), SHIFT)

    @property
    def is_shifted(self) -> bool:
        return self.shift != 0

    @property
    def N(self) -> int:
        return self.gamma.N


def wronskian_rows(sys: DetSystem, r, rows, scaled=True):
    """Rows ``k`` (1-based) of the M-type entries at ``r + shift``.

    Returns an array of shape ``r.shape + (len(rows), N)`` and the log scale
    ``sum_j gamma_j |r|`` that was divided out (0 when ``scaled`` is False).
    """
    g = sys.gamma.array()
    r = np.asarray(r, dtype=float)
    ks = np.asarray(rows)
    js = np.arange(1, g.size + 1)
    sign = (-1.0) ** (ks[:, None] + js[None, :])
    power = g[None, :] ** (ks[:, None] - 1)
    rr = r[..., None, None]
    if scaled:
        # exp(g(r+s)) and exp(-g(r+s)), each divided by exp(g|r|)
        grow = np.exp(g * sys.shift) * np.exp(g * (rr - np.abs(rr)))
        decay = np.exp(-g * sys.shift) * np.exp(-g * (rr + np.abs(rr)))
        log_scale = np.abs(r) * g.sum()
    else:
        x = rr + sys.shift
        grow, decay = np.exp(g * x), np.exp(-g * x)
        log_scale = np.zeros_like(r)
    entries = 0.5 * power * (grow + sign * decay)
    if not sys.is_shifted:
        entries = entries.real
    return entries, log_scale


def sine_derivatives(kappa, r, orders):
    """d^p/dr^p sin(kappa r) for each p in ``orders``; shape ``r.shape + (len(orders),)``."""
    r = np.asarray(r, dtype=float)[..., None]
    p = np.asarray(orders)
    return kappa**p * np.sin(kappa * r + 0.5 * math.pi * p)


def build_m(sys: DetSystem, r, scaled=True):
    """(M, log_scale) with M the N x N matrix at ``r + shift``."""
    return wronskian_rows(sys, r, range(1, sys.N + 1), scaled)


def build_d_scatter(sys: DetSystem, r, kappa, scaled=True):
    """(D, log_scale): M rows 1..N+1 bordered by derivatives of sin(kappa r).

    The sine column is evaluated at real ``r`` even for the shifted system
    and is never rescaled, so det D / det M is the same with or without
    scaling.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    N = sys.N
    m_part, log_scale = wronskian_rows(sys, r, range(1, N + 2), scaled)
    col = sine_derivatives(kappa, r, range(N + 1))
    d = np.concatenate([m_part, col[..., None].astype(m_part.dtype)], axis=-1)
    return d, log_scale


def log_det_m(sys: DetSystem, r):
    """(phase, log|det M|) including the removed scale."""
    m, log_scale = build_m(sys, r)
    phase, logabs = lu_slogdet(m)
    return phase, logabs + log_scale


def det_m(sys: DetSystem, r):
    phase, logabs = log_det_m(sys, r)
    return phase * np.exp(logabs)


def _row_equilibrate(*mats):
    scale = np.max(np.abs(mats[0]), axis=-1, keepdims=True)
    return [m / scale for m in mats]


def log_det_second_derivative(sys: DetSystem, r):
    """d^2/dr^2 ln det M from exact entry derivatives.

    Uses tr(M^-1 M'') - tr((M^-1 M')^2) with M' and M'' the row-shifted
    Wronskian matrices.  Column scaling is a similarity transform of
    M^-1 M' and drops out of both traces.
    """
    N = sys.N
    rows, _ = wronskian_rows(sys, r, range(1, N + 3))
    m, m1, m2 = rows[..., :N, :], rows[..., 1:N + 1, :], rows[..., 2:N + 2, :]
    m, m1, m2 = _row_equilibrate(m, m1, m2)
    try:
        sol = np.linalg.solve(m, np.concatenate([m1, m2], axis=-1))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("det M is singular; gammas must be distinct") from exc
    a, b = sol[..., :N], sol[..., N:]
    out = np.trace(b, axis1=-2, axis2=-1) - np.einsum("...ij,...ji->...", a, a)
    if not sys.is_shifted:
        out = out.real
    return out[()] if np.ndim(out) == 0 else out


def vandermonde_det(gammas) -> float:
    """prod_{j<k} (gamma_k - gamma_j)."""
    g = list(gammas)
    return math.prod(g[k] - g[j] for j in range(len(g)) for k in range(j + 1, len(g)))


def _check_closed_form_n(N):
    if not 1 <= N <= 10:
        raise ValueError("closed-form det M is provided for 1 <= N <= 10")


def closed_form_det_m(N: int, x):
    """2^(N(N-1)/2) cosh(x)^(N(N+1)/2) prod_{j=1}^{N-1} j!  (x may be complex)."""
    _check_closed_form_n(N)
    const = 2 ** (N * (N - 1) // 2) * math.prod(math.factorial(j) for j in range(1, N))
    return const * np.cosh(x) ** (N * (N + 1) // 2)


def closed_form_log_det_m(N: int, x):
    """Natural log of ``closed_form_det_m`` for real x, safe at large |x|."""
    _check_closed_form_n(N)
    x = np.abs(np.asarray(x, dtype=float))
    log_cosh = x + np.log1p(np.exp(-2 * x)) - math.log(2)
    const = (N * (N - 1) // 2) * math.log(2) + sum(math.lgamma(j + 1) for j in range(1, N))
    return const + (N * (N + 1) // 2) * log_cosh
