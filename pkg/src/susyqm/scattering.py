"""
Scattering states and phase shifts on the half line.

Three independent routes to the phase shift of the sech^2 / cosech^2 pair:

* closed form, n pi - sum_{j=1}^{2n} arctan(kappa/j) (deep) and the same
  without n pi (singular);
* the determinant state det D / det M, matched to sin(kappa r + delta) far out;
* Numerov integration of the radial equation, matched the same way.

Phases come out of the matching modulo pi.  ``lift_curve`` restores a
continuous branch along a kappa grid, anchored at the largest kappa; the
zero-energy limit is then a check (Levinson), not an input.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import GridSpec, QuadratureSpec, integrate, lu_det, numerov_integrate
from .potentials import (
    PotentialKind,
    PotentialModel,
    bound_state,
    bound_state_derivative,
    eval_potential,
    partner_state,
)
from .soliton_matrices import DetSystem, sine_derivatives, wronskian_rows

__all__ = [
    "Method",
    "ScatteringSolution",
    "scattering_solution",
    "PhaseShiftCurve",
    "MatchingWindowError",
    "scatter_state_det",
    "asymptotic_form",
    "scattering_state_n1",
    "phase_shift_analytic",
    "phase_shift_singular_analytic",
    "extract_phase",
    "phase_and_amplitude",
    "lift_phase",
    "lift_curve",
    "numerov_solution",
    "numerov_phase_shift",
    "determinant_phase_shift",
    "phase_shift_curve",
    "integral_phase_check",
    "integral_phase_check_n1",
    "born_phase",
    "born_phase_quadrature",
    "wavefunction_relation_check",
    "R_MATCH",
    "DEFAULT_GRID",
]

R_MATCH = 25.0
DEFAULT_GRID = GridSpec(0.0, 25.0, 1e-3)
SINGULAR_R_MIN = 1e-2


class Method(enum.Enum):
    DETERMINANT_RATIO = "determinant"
    NUMEROV = "numerov"
    CLOSED_FORM = "analytic"


class MatchingWindowError(ValueError):
    """The potential has not decayed at the matching radius."""


@dataclass
class ScatteringSolution:
    """Sampled regular solution at energy kappa^2 and its phase shift."""

    kappa: float
    r: np.ndarray
    values: np.ndarray
    delta: float
    method: Method

    def asymptotic_fit(self, r_from: float = 20.0):
        """Least-squares fit of a sin(kappa r) + b cos(kappa r) for r >= ``r_from``.

        Returns ``(delta mod pi in (-pi/2, pi/2], amplitude, residual)`` where
        the residual is the largest misfit relative to the amplitude.
        """
        mask = self.r >= r_from
        if np.count_nonzero(mask) < 3:
            raise ValueError("fewer than three samples in the fit window")
        r, y = self.r[mask], self.values[mask]
        basis = np.stack([np.sin(self.kappa * r), np.cos(self.kappa * r)], axis=1)
        (a, b), *_ = np.linalg.lstsq(basis, y, rcond=None)
        amp = math.hypot(a, b)
        resid = float(np.max(np.abs(basis @ (a, b) - y)) / amp)
        return float(_reduce(math.atan2(b, a))), amp, resid


@dataclass
class PhaseShiftCurve:
    kappas: np.ndarray
    deltas: np.ndarray
    boundstate_count: int
    method: Method = Method.CLOSED_FORM
    principal: np.ndarray = field(default=None, repr=False)

    def zero_energy_limit(self) -> float:
        return float(self.deltas[np.argmin(self.kappas)])

    def levinson_error(self) -> float:
        return abs(self.zero_energy_limit() - math.pi * self.boundstate_count)


# ---------------------------------------------------------------- determinant states


def scatter_state_det(sys: DetSystem, kappa, r, derivative=False):
    """det D(r) / det M(r) for the system ``sys``, optionally with its r-derivative.

    The derivative uses the Wronskian rule: d/dr of a Wronskian determinant
    replaces its last row by the next derivative row.  For the shifted
    system the i^gamma column factors cancel and the real part is returned.

    Near r = 0 the shifted system loses digits to cancellation, since
    det M(r + i pi/2) ~ sinh(r)^(N(N+1)/2): for N = 6 the relative error is
    ~1e-9 at r = 0.5 and ~1e-6 at r = 0.3.
    """
    N = sys.N
    r = np.asarray(r, dtype=float)
    rows, _ = wronskian_rows(sys, r, range(1, N + 3))
    sine = sine_derivatives(kappa, r, range(N + 2)).astype(rows.dtype)
    m = rows[..., :N, :]
    d = np.concatenate([rows[..., :N + 1, :], sine[..., :N + 1, None]], axis=-1)
    det_m = lu_det(m)
    psi = lu_det(d) / det_m
    if derivative:
        keep = list(range(N - 1)) + [N]
        dm = lu_det(rows[..., keep, :])
        keep_d = list(range(N)) + [N + 1]
        dd = lu_det(np.concatenate([rows[..., keep_d, :], sine[..., keep_d, None]], axis=-1))
        dpsi = dd / det_m - psi * dm / det_m
    if sys.is_shifted:
        psi = _realify(psi)
        if derivative:
            dpsi = _realify(dpsi)
    if derivative:
        return psi, dpsi
    return psi


def _realify(v):
    v = np.asarray(v)
    if np.all(np.abs(v.imag) <= 1e-9 * np.maximum(1.0, np.abs(v.real))):
        v = v.real
    return v[()] if v.ndim == 0 else v


def asymptotic_form(n: int, kappa, r):
    """Large-r limit of det D / det M for gamma = 1..2n:
    -(i/2) e^{i kappa r} prod(-j + i kappa) + (i/2) e^{-i kappa r} prod(-j - i kappa)."""
    j = np.arange(1, 2 * n + 1)
    p_plus = np.prod(-j + 1j * kappa)
    p_minus = np.prod(-j - 1j * kappa)
    r = np.asarray(r, dtype=float)
    val = -0.5j * np.exp(1j * kappa * r) * p_plus + 0.5j * np.exp(-1j * kappa * r) * p_minus
    return val.real


def scattering_state_n1(kappa, r, singular=False):
    """Closed-form scattering states for n = 1.

    Deep:     (kappa^2 - 2 + 3 sech^2 r) sin(kappa r) + 3 kappa tanh r cos(kappa r)
    Singular: (kappa^2 - 2 - 3 cosech^2 r) sin(kappa r) + 3 kappa coth r cos(kappa r)

    Both are the negatives of the corresponding determinant ratios.
    """
    r = np.asarray(r, dtype=float)
    s, c = np.sin(kappa * r), np.cos(kappa * r)
    if singular:
        if np.any(r <= 0):
            raise ValueError("singular state needs r > 0")
        return (kappa**2 - 2 - 3 / np.sinh(r) ** 2) * s + 3 * kappa / np.tanh(r) * c
    return (kappa**2 - 2 + 3 / np.cosh(r) ** 2) * s + 3 * kappa * np.tanh(r) * c


# ---------------------------------------------------------------- closed forms


def phase_shift_analytic(n: int, kappa):
    """n pi - sum_{j=1}^{2n} arctan(kappa/j)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return n * math.pi + phase_shift_singular_analytic(n, kappa)


def phase_shift_singular_analytic(n: int, kappa):
    """-sum_{j=1}^{2n} arctan(kappa/j)."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise ValueError("kappa must be positive")
    total = sum(np.arctan(kappa / j) for j in range(1, 2 * n + 1))
    out = -np.asarray(total, dtype=float)
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------- matching


def _reduce(delta):
    """Map into (-pi/2, pi/2]."""
    d = np.mod(np.asarray(delta) + 0.5 * math.pi, math.pi) - 0.5 * math.pi
    d = np.where(d == -0.5 * math.pi, 0.5 * math.pi, d)
    return d[()] if d.ndim == 0 else d


def phase_and_amplitude(y, dy, kappa, r):
    """(delta mod 2pi, A) with y = A sin(kappa r + delta), y' = A kappa cos(...)."""
    theta = np.arctan2(kappa * np.asarray(y), np.asarray(dy))
    amp = np.hypot(y, np.asarray(dy) / kappa)
    delta = np.mod(theta - kappa * np.asarray(r) + math.pi, 2 * math.pi) - math.pi
    return delta, amp


def extract_phase(r, y, kappa, r_match=None, dy=None, potential=None, window_tol=1e-12):
    """Phase shift modulo pi from a sampled solution, reduced to (-pi/2, pi/2].

    With ``dy`` given, ``r``, ``y``, ``dy`` are the value and slope at the
    matching radius.  Otherwise ``r``/``y`` are uniformly spaced samples,
    the slope at ``r_match`` comes from a five-point stencil, and
    ``r_match`` defaults to the last node that admits a centred stencil.

    If ``potential`` is supplied and |V(r_match)| exceeds ``window_tol``,
    ``MatchingWindowError`` is raised.
    """
    if dy is None:
        r = np.asarray(r, dtype=float)
        y = np.asarray(y, dtype=float)
        if r.size < 5:
            raise ValueError("need at least five samples")
        h = r[1] - r[0]
        i = r.size - 3 if r_match is None else int(round((r_match - r[0]) / h))
        if not 2 <= i <= r.size - 3:
            raise ValueError("r_match must leave two samples on each side")
        rm = r[i]
        val = y[i]
        slope = (y[i - 2] - 8 * y[i - 1] + 8 * y[i + 1] - y[i + 2]) / (12 * h)
    else:
        rm, val, slope = r, y, dy
    if potential is not None and abs(potential(rm)) > window_tol:
        raise MatchingWindowError(f"|V({rm:g})| = {abs(potential(rm)):.3e} > {window_tol:g}")
    delta, _ = phase_and_amplitude(val, slope, kappa, rm)
    return _reduce(delta)


def lift_phase(delta, reference):
    """delta + k pi closest to ``reference``."""
    return delta + math.pi * np.round((reference - delta) / math.pi)


def lift_curve(kappas, principal, anchor):
    """Continuous branch of phases known modulo pi.

    Walks from the largest kappa (placed on the branch nearest ``anchor``)
    toward the smallest, each step choosing the branch nearest its
    neighbour.  Returns phases in the input order.
    """
    kappas = np.asarray(kappas, dtype=float)
    principal = np.asarray(principal, dtype=float)
    order = np.argsort(kappas)[::-1]
    out = np.empty_like(principal)
    prev = anchor
    for i in order:
        prev = lift_phase(principal[i], prev)
        out[i] = prev
    return out


def determinant_phase_shift(n: int, kappa, r_match=R_MATCH, singular=False):
    """Phase shift mod pi from det D / det M at ``r_match`` (value and exact slope)."""
    sys = DetSystem.shifted(2 * n) if singular else DetSystem.deep(2 * n)
    psi, dpsi = scatter_state_det(sys, kappa, r_match, derivative=True)
    return extract_phase(r_match, psi, kappa, dy=dpsi)


# ---------------------------------------------------------------- Numerov


def _frobenius_start(l, kappa, r):
    # y = r^(l+1) (1 + c r^2) for V = l(l+1)/sinh^2 r = l(l+1)(1/r^2 - 1/3 + ...)
    c = -(l * (l + 1) / 3.0 + kappa**2) / (4 * l + 6)
    return r ** (l + 1) * (1 + c * r * r)


def numerov_solution(model: PotentialModel, kappa, grid: GridSpec | None = None):
    """Regular solution of y'' = (V - kappa^2) y on ``grid``.

    ``kappa`` may be an array; the equations are integrated side by side and
    the samples have shape ``(nodes, len(kappa))``.  Regular potentials
    start at r = 0 with y ~ r + (V(0) - kappa^2) r^3/6; the cosech^2
    potential starts at ``grid.r_min > 0`` on its r^(2n+1) Frobenius branch.
    """
    kappa_arr = np.atleast_1d(np.asarray(kappa, dtype=float))
    singular = model.kind is PotentialKind.SINGULAR_COSECH2 or (
        model.kind is PotentialKind.DETERMINANT_BUILT and model.system.is_shifted)
    if grid is None:
        grid = GridSpec(SINGULAR_R_MIN, DEFAULT_GRID.r_max, DEFAULT_GRID.step) if singular else DEFAULT_GRID
    r = grid.nodes()
    if singular:
        if grid.r_min <= 0:
            raise ValueError("singular potential needs r_min > 0")
        V = eval_potential(model, r)
        l = 2 * model.n
        y0 = _frobenius_start(l, kappa_arr, r[0])
        y1 = _frobenius_start(l, kappa_arr, r[1])
    else:
        if grid.r_min != 0:
            raise ValueError("regular potentials start at r = 0")
        V = eval_potential(model, r) if model.n or model.kind is PotentialKind.DETERMINANT_BUILT else np.zeros_like(r)
        h = grid.step
        y0 = np.zeros_like(kappa_arr)
        y1 = h + (V[0] - kappa_arr**2) * h**3 / 6
    q = V[:, None] - kappa_arr[None, :] ** 2
    y = numerov_integrate(q, grid, y0, y1)
    if np.ndim(kappa) == 0:
        return r, y[:, 0]
    return r, y


def numerov_phase_shift(model: PotentialModel, kappa, grid: GridSpec | None = None, reference=None):
    """Numerov phase shift; mod pi unless ``reference`` picks the branch.

    Scalar or array ``kappa``.  Matching happens at the last node that
    admits a centred five-point slope.
    """
    r, y = numerov_solution(model, kappa, grid)
    if np.ndim(kappa) == 0:
        d = extract_phase(r, y, kappa, potential=lambda x: eval_potential(model, x))
    else:
        d = np.array([extract_phase(r, y[:, i], k) for i, k in enumerate(np.asarray(kappa, dtype=float))])
    if reference is not None:
        d = lift_phase(d, reference)
    return d


def scattering_solution(n: int, kappa: float, method: Method = Method.DETERMINANT_RATIO, singular=False,
                        grid: GridSpec | None = None) -> ScatteringSolution:
    """Regular solution of the deep (or singular) potential sampled on ``grid``.

    The closed-form route exists for n = 1 only.  ``delta`` is the matched
    phase placed on the branch nearest the closed form; only its value
    modulo pi comes from the solution.  Determinant samples of the singular
    system start at r = 0.5 by default, since det M(r + i pi/2) vanishes
    like sinh(r)^(N(N+1)/2) and loses digits near the origin.
    """
    exact = phase_shift_singular_analytic(n, kappa) if singular else phase_shift_analytic(n, kappa)
    if method is Method.NUMEROV:
        model = PotentialModel.singular(n) if singular else PotentialModel.deep(n)
        r, y = numerov_solution(model, kappa, grid)
        delta = extract_phase(r, y, kappa)
    else:
        if grid is None:
            grid = GridSpec(0.5 if singular else 0.0, 30.0, 1e-2)
        r = grid.nodes()
        if method is Method.CLOSED_FORM:
            if n != 1:
                raise ValueError("closed-form scattering states are implemented for n = 1")
            y = scattering_state_n1(kappa, r, singular=singular)
            delta = _reduce(exact)
        else:
            sys = DetSystem.shifted(2 * n) if singular else DetSystem.deep(2 * n)
            y = np.real(scatter_state_det(sys, kappa, r))
            delta = determinant_phase_shift(n, kappa, singular=singular)
    return ScatteringSolution(float(kappa), r, np.asarray(y, dtype=float), float(lift_phase(delta, exact)), method)


# ---------------------------------------------------------------- curves


def phase_shift_curve(n: int, kappas, method: Method = Method.CLOSED_FORM, singular=False,
                      grid: GridSpec | None = None) -> PhaseShiftCurve:
    """Phase shifts on a kappa grid, lifted to a continuous branch.

    Numerical methods are anchored to the closed form at the largest kappa
    only; every other kappa follows by continuity.
    """
    kappas = np.asarray(kappas, dtype=float)
    exact = phase_shift_singular_analytic(n, kappas) if singular else phase_shift_analytic(n, kappas)
    count = 0 if singular else n
    if method is Method.CLOSED_FORM:
        return PhaseShiftCurve(kappas, np.asarray(exact, dtype=float), count, method, _reduce(exact))
    # |d delta / d kappa| <= H_2n, so steps below (pi/4)/H_2n cannot skip a branch
    walk = _walking_grid(kappas, (math.pi / 4) / sum(1.0 / j for j in range(1, 2 * n + 1)))
    if method is Method.DETERMINANT_RATIO:
        principal = np.array([determinant_phase_shift(n, k, singular=singular) for k in walk])
    else:
        model = PotentialModel.singular(n) if singular else PotentialModel.deep(n)
        principal = numerov_phase_shift(model, walk, grid)
    anchor = float(np.atleast_1d(exact)[np.argmax(kappas)])
    lifted = lift_curve(walk, principal, anchor)
    pick = np.searchsorted(walk, kappas)
    return PhaseShiftCurve(kappas, lifted[pick], count, method, principal[pick])


def _walking_grid(kappas, max_gap):
    """Sorted unique kappas with extra points filling any gap wider than ``max_gap``."""
    pts = np.unique(kappas)
    filled = [pts[:1]]
    for a, b in zip(pts[:-1], pts[1:]):
        m = int(math.ceil((b - a) / max_gap))
        filled.append(np.linspace(a, b, m + 1)[1:])
    return np.concatenate(filled)


# ---------------------------------------------------------------- integral forms

_TIGHT = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12, max_subdivisions=4000)


def _normalized_deep_state(n, kappa, r_match=R_MATCH):
    """det-state rescaled to sin(kappa r + delta) asymptotically; returns (psi(r) callable, delta)."""
    sys = DetSystem.deep(2 * n)
    y, dy = scatter_state_det(sys, kappa, r_match, derivative=True)
    delta, amp = phase_and_amplitude(y, dy, kappa, r_match)

    def psi(r):
        return scatter_state_det(sys, kappa, r) / amp

    return psi, float(delta)


def integral_phase_check(n: int, kappa: float, spec: QuadratureSpec = _TIGHT) -> float:
    """[-(1/kappa) int_0^inf V_d sin(kappa r) Psi dr] / sin(delta).

    Psi is the determinant state rescaled so it tends to sin(kappa r + delta);
    the ratio is 1 when the integral representation of sin(delta) is exact.
    """
    psi, delta = _normalized_deep_state(n, kappa)
    model = PotentialModel.deep(n)

    def integrand(r):
        return eval_potential(model, r) * np.sin(kappa * r) * psi(r)

    val, _ = integrate(integrand, 0.0, math.inf, spec)
    return (-val / kappa) / math.sin(delta)


def integral_phase_check_n1(kappa: float, spec: QuadratureSpec = _TIGHT) -> float:
    """(2/kappa^2) int_0^inf sin(kappa r) sech^2 r [(kappa^2 - 2 + 3 sech^2 r) sin(kappa r)
    + 3 kappa tanh r cos(kappa r)] dr, which equals 1."""

    def integrand(r):
        s2 = 1 / np.cosh(r) ** 2
        wave = (kappa**2 - 2 + 3 * s2) * np.sin(kappa * r) + 3 * kappa * np.tanh(r) * np.cos(kappa * r)
        return np.sin(kappa * r) * s2 * wave

    val, _ = integrate(integrand, 0.0, math.inf, spec)
    return 2 * val / kappa**2


def born_phase_quadrature(kappa: float, spec: QuadratureSpec = _TIGHT) -> float:
    """(6/kappa) int_0^inf sin^2(kappa r) sech^2 r dr."""
    val, _ = integrate(lambda r: np.sin(kappa * r) ** 2 / np.cosh(r) ** 2, 0.0, math.inf, spec)
    return 6 * val / kappa


def born_phase(kappa: float, tol: float = 1e-8) -> float:
    """Born sin(delta) for -6 sech^2 r: (3/kappa)(1 - kappa pi / sinh(kappa pi)).

    The quadrature form is evaluated alongside; disagreement beyond ``tol``
    raises ``AssertionError``.  Values above 1 at small kappa are returned
    as is: the approximation only holds for large kappa.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    x = kappa * math.pi
    ratio = 2 * x * math.exp(-x) / (-math.expm1(-2 * x))  # x / sinh x
    closed = 3 / kappa * (1 - ratio)
    quad = born_phase_quadrature(kappa)
    if abs(quad - closed) > tol:
        raise AssertionError(f"Born quadrature {quad!r} vs closed form {closed!r}")
    return closed


def wavefunction_relation_check(n: int, kappa: float, r: float) -> float:
    """Relative residual of
    Phi(kappa,r) = Psi(kappa,r) + sum_j Phi_j/(gamma_j^2 + kappa^2) (Psi_j Psi' - Psi Psi_j'),
    with Psi, Phi the determinant states of the deep and shifted systems."""
    if not r > 0:
        raise ValueError("need r > 0")
    psi, dpsi = scatter_state_det(DetSystem.deep(2 * n), kappa, r, derivative=True)
    phi = scatter_state_det(DetSystem.shifted(2 * n), kappa, r)
    rhs = psi
    for j in range(1, n + 1):
        g = 2 * j - 1
        w = bound_state(n, j, r) * dpsi - psi * bound_state_derivative(n, j, r)
        rhs = rhs + partner_state(n, j, r) * w / (g * g + kappa**2)
    return float(abs(phi - rhs) / max(abs(phi), 1.0))
