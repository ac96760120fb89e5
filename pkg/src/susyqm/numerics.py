"""
Shared numerical kernels: LU determinants and solves, adaptive
Gauss-Kronrod quadrature, finite-difference stencils and a Numerov
integrator for y'' = q(r) y.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureSpec",
    "GridSpec",
    "SingularMatrixError",
    "QuadratureError",
    "lu_factor",
    "lu_det",
    "lu_slogdet",
    "lin_solve",
    "integrate",
    "numerov_integrate",
    "central_derivative",
    "central_second_derivative",
    "second_log_derivative",
]

PIVOT_FLOOR = 1e-300


class SingularMatrixError(np.linalg.LinAlgError):
    def __init__(self, pivot_index, message=None):
        self.pivot_index = pivot_index
        super().__init__(message or f"matrix is singular at pivot {pivot_index}")


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature runs out of subdivisions."""

    def __init__(self, estimate, error, message=None):
        self.estimate = estimate
        self.error = error
        super().__init__(message or f"no convergence: estimate={estimate!r}, error bound={error!r}")


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class GridSpec:
    r_min: float
    r_max: float
    step: float

    def __post_init__(self):
        if self.r_min < 0:
            raise ValueError("r_min must be >= 0")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.r_min < self.r_max:
            raise ValueError("r_min must be below r_max")
        count = (self.r_max - self.r_min) / self.step
        if abs(count - round(count)) > 1e-9 * max(1.0, count):
            raise ValueError("(r_max - r_min)/step must be an integer")

    @property
    def intervals(self) -> int:
        return int(round((self.r_max - self.r_min) / self.step))

    def nodes(self) -> np.ndarray:
        return self.r_min + self.step * np.arange(self.intervals + 1)


# ---------------------------------------------------------------- linear algebra


def lu_factor(a):
    """LU with partial pivoting over the trailing two axes.

    Returns ``(lu, perm, sign)`` where ``lu`` packs unit-lower L and U,
    ``perm`` is the row permutation and ``sign`` its parity.  Works on a
    single matrix or a stack, real or complex.  A zero pivot column is left
    in place (U gets a zero diagonal) rather than raising.
    """
    lu = np.array(a, dtype=np.result_type(a, float), copy=True)
    if lu.ndim < 2 or lu.shape[-1] != lu.shape[-2]:
        raise ValueError("lu_factor needs square matrices")
    n = lu.shape[-1]
    batch = lu.shape[:-2]
    lu = lu.reshape((-1, n, n))
    rows = np.arange(lu.shape[0])
    perm = np.tile(np.arange(n), (lu.shape[0], 1))
    sign = np.ones(lu.shape[0])
    for k in range(n):
        p = k + np.argmax(np.abs(lu[:, k:, k]), axis=1)
        swap = p != k
        if np.any(swap):
            idx = rows[swap]
            lu[idx, k], lu[idx, p[swap]] = lu[idx, p[swap]].copy(), lu[idx, k].copy()
            perm[idx, k], perm[idx, p[swap]] = perm[idx, p[swap]].copy(), perm[idx, k].copy()
            sign[swap] *= -1
        piv = lu[:, k, k]
        ok = np.abs(piv) >= PIVOT_FLOOR
        safe = np.where(ok, piv, 1)
        lu[:, k + 1:, k] = np.where(ok[:, None], lu[:, k + 1:, k] / safe[:, None], 0)
        lu[:, k + 1:, k + 1:] -= lu[:, k + 1:, k, None] * lu[:, k, None, k + 1:]
    return lu.reshape(batch + (n, n)), perm.reshape(batch + (n,)), sign.reshape(batch)


def _pivots(lu):
    return np.diagonal(lu, axis1=-2, axis2=-1)


def lu_det(a):
    """Determinant by partial-pivoting LU; exactly 0 if any pivot < 1e-300."""
    lu, _, sign = lu_factor(a)
    piv = _pivots(lu)
    det = sign * np.prod(piv, axis=-1)
    det = np.where(np.any(np.abs(piv) < PIVOT_FLOOR, axis=-1), 0, det)
    return det[()] if np.ndim(det) == 0 else det


def lu_slogdet(a):
    """``(phase, log|det|)`` from the same factorization; phase is +-1 for real input."""
    lu, _, sign = lu_factor(a)
    piv = _pivots(lu)
    absp = np.abs(piv)
    with np.errstate(divide="ignore"):
        logabs = np.sum(np.log(absp), axis=-1)
    phase = sign * np.prod(piv / np.where(absp > 0, absp, 1), axis=-1)
    singular = np.any(absp < PIVOT_FLOOR, axis=-1)
    phase = np.where(singular, 0, phase)
    logabs = np.where(singular, -np.inf, logabs)
    if np.ndim(logabs) == 0:
        return phase[()], float(logabs)
    return phase, logabs


def lin_solve(a, b):
    """Solve ``a x = b`` for a single square matrix.

    Raises ``SingularMatrixError`` naming the first pivot below 1e-300
    (scaled by the matrix norm).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2:
        raise ValueError("lin_solve takes one matrix")
    lu, perm, _ = lu_factor(a)
    n = a.shape[0]
    scale = max(np.max(np.abs(a)), PIVOT_FLOOR)
    piv = np.abs(np.diag(lu))
    bad = np.nonzero(piv < PIVOT_FLOOR * scale)[0]
    if bad.size:
        raise SingularMatrixError(int(bad[0]))
    x = np.array(b[perm], dtype=np.result_type(lu, b, float))
    for i in range(1, n):
        x[i] -= lu[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - lu[i, i + 1:] @ x[i + 1:]) / lu[i, i]
    return x


# ---------------------------------------------------------------- quadrature

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5]] = _WG[:3]
_GW[[13, 11, 9]] = _WG[:3]
_GW[7] = _WG[3]
_EPS = np.finfo(float).eps


def _gk15(f, a, b):
    half = 0.5 * (b - a)
    center = 0.5 * (b + a)
    fx = f(center + half * _NODES)
    kron = half * (_KW @ fx)
    gauss = half * (_GW @ fx)
    mean = kron / (b - a) if b != a else 0.0
    resasc = abs(half) * (_KW @ np.abs(fx - mean))
    resabs = abs(half) * (_KW @ np.abs(fx))
    err = abs(kron - gauss)
    if resasc and err:
        err = resasc * min(1.0, (200 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50 * _EPS):
        err = max(50 * _EPS * resabs, err)
    return kron, err


def _vectorize(f):
    probe = np.array([0.25, 0.5])

    def looped(x):
        return np.array([f(float(v)) for v in x], dtype=float)

    try:
        out = np.asarray(f(probe), dtype=float)
    except Exception:
        return looped
    return f if out.shape == probe.shape else looped


def integrate(f, a, b, spec: QuadratureSpec | None = None):
    """Adaptive 15-point Gauss-Kronrod estimate of the integral of f on [a, b].

    ``b`` may be ``inf``; the half line [a, inf) is mapped to [0, 1) with
    r = a + 2 artanh(t).  The map suits integrands with exponential decay;
    algebraic tails turn into endpoint singularities.  Intervals with the
    largest error are bisected until the total error is within
    ``max(abs_tol, rel_tol*|I|)``.

    Returns ``(estimate, error_bound)``.  Raises ``QuadratureError`` with the
    best estimate if ``max_subdivisions`` is exhausted.
    """
    spec = spec or QuadratureSpec()
    g = _vectorize(f)
    if math.isinf(b):
        if b < 0:
            raise ValueError("only +inf is supported as an infinite limit")
        base, origin = g, a

        def g(t):
            # t = tanh((r - a)/2), dr = 2 dt/(1 - t^2); nodes that round onto
            # t = 1 sit at r = inf where an admissible integrand has decayed
            jac = 2.0 / ((1 - t) * (1 + t))
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = base(origin + 2 * np.arctanh(t)) * jac
            return np.where(np.isfinite(jac), vals, 0.0)

        a, b = 0.0, 1.0
    if a == b:
        return 0.0, 0.0
    kron, err = _gk15(g, a, b)
    heap = [(-err, a, b, kron)]
    total, total_err = kron, err
    for _ in range(spec.max_subdivisions):
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return float(total), float(total_err)
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1 = _gk15(g, lo, mid)
        k2, e2 = _gk15(g, mid, hi)
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
        # resum instead of updating to avoid drift
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
        return float(total), float(total_err)
    raise QuadratureError(float(total), float(total_err))


# ---------------------------------------------------------------- ODE


def numerov_integrate(q, grid: GridSpec, y0, y1):
    """Integrate y'' = q(r) y across ``grid`` with the Numerov recurrence.

    ``q`` is a callable evaluated once on the node array (it may return
    shape ``(nodes, ...)`` to integrate several equations at once, with
    ``y0``/``y1`` broadcasting over the trailing axes) or a precomputed array.
    Returns the samples at every node, first axis along r.
    """
    r = grid.nodes()
    qv = np.asarray(q(r) if callable(q) else q, dtype=float)
    if qv.shape[0] != r.size:
        raise ValueError("q must provide one value per grid node")
    if not np.all(np.isfinite(qv)):
        raise ValueError("q is not finite on the grid")
    # Summed form: with z = (1 - h^2 q/12) y the recurrence is
    # z[i+1] - 2 z[i] + z[i-1] = h^2 q[i] y[i].  Carrying the increment
    # z[i+1] - z[i] avoids the cancellation in the textbook coefficient
    # (12 - 10 w)/w = 2 + O(h^2 q), which costs ~8 digits of the frequency.
    h2 = grid.step**2
    w = 1.0 - h2 * qv / 12.0
    y = np.empty(np.broadcast_shapes(qv.shape, (1,) + np.shape(y0), (1,) + np.shape(y1)))
    y[0] = y0
    y[1] = y1
    z = w[1] * y[1]
    dz = z - w[0] * y[0]
    for i in range(1, r.size - 1):
        dz = dz + h2 * qv[i] * y[i]
        z = z + dz
        y[i + 1] = z / w[i + 1]
        if np.any(np.abs(y[i + 1]) > 1e300):
            raise OverflowError(f"Numerov solution exceeded 1e300 at r={r[i + 1]:g}; renormalize")
    return y


# ---------------------------------------------------------------- finite differences


def central_derivative(g, r, h):
    """Five-point O(h^4) estimate of g'(r)."""
    return (g(r - 2 * h) - 8 * g(r - h) + 8 * g(r + h) - g(r + 2 * h)) / (12 * h)


def central_second_derivative(g, r, h):
    """Five-point O(h^4) estimate of g''(r)."""
    return (-g(r - 2 * h) + 16 * g(r - h) - 30 * g(r) + 16 * g(r + h) - g(r + 2 * h)) / (12 * h * h)


def second_log_derivative(f, r, h=1e-3):
    """d^2/dr^2 ln f(r) by the five-point stencil; f must be positive on [r-2h, r+2h]."""

    def logf(x):
        v = np.asarray(f(x), dtype=float)
        if np.any(v <= 0):
            raise ValueError(f"f is not positive near r={x!r}")
        return np.log(v)

    return central_second_derivative(logf, r, h)
