"""
Verification campaigns and report plumbing behind the ``susyqm`` command.

Every check in ``REGISTRY`` measures one worst-case error over a parameter
sweep and compares it with one tolerance.  Reports are sorted by check name,
so output order never depends on execution order.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import phase_equiv as pe
from .numerics import QuadratureError, SingularMatrixError
from .potentials import (
    RepresentationMismatch,
    appendix_derivative_form,
    complex_shift_check,
    eigenstate_sum_potential,
    ladder_descend,
    partner_state,
)
from .scattering import (
    Method,
    asymptotic_form,
    born_phase_quadrature,
    integral_phase_check,
    integral_phase_check_n1,
    phase_shift_curve,
    scatter_state_det,
    scattering_state_n1,
)
from .soliton_matrices import (
    DetSystem,
    closed_form_det_m,
    det_m,
    log_det_second_derivative,
)
from .special_functions import full_line_normalizer, legendre_inside

__all__ = [
    "ConfigError",
    "KappaGrid",
    "RunConfig",
    "VerificationReport",
    "REGISTRY",
    "DEFAULT_TOLERANCES",
    "N_CEILING",
    "run_check",
    "run_all",
    "reports_to_json",
    "reports_from_json",
    "reports_to_csv",
    "table_to_csv",
    "format_float_json",
    "encode_json",
    "REPORT_COLUMNS",
]

N_CEILING = 3
SEED_ENV = "SUSYQM_SEED"
REPORT_COLUMNS = ("check_name", "params", "grid", "max_abs_error", "tolerance", "passed", "runtime_ms")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


@dataclass(frozen=True)
class KappaGrid:
    min: float = 0.3
    max: float = 5.0
    count: int = 24
    spacing: str = "linear"

    def validate(self):
        if self.count < 1:
            raise ConfigError("kappa_grid.count: must be >= 1")
        if not 0 < self.min <= self.max:
            raise ConfigError("kappa_grid: need 0 < min <= max")
        if self.count > 1 and self.min == self.max:
            raise ConfigError("kappa_grid: min == max with count > 1")
        if self.spacing not in ("linear", "log"):
            raise ConfigError("kappa_grid.spacing: must be 'linear' or 'log'")

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.min])
        if self.spacing == "log":
            return np.geomspace(self.min, self.max, self.count)
        return np.linspace(self.min, self.max, self.count)


@dataclass(frozen=True)
class RunConfig:
    n: int = N_CEILING
    kappa_grid: KappaGrid = field(default_factory=KappaGrid)
    r_min: float | None = None
    r_max: float | None = None
    step: float | None = None
    tolerances: Mapping[str, float] = field(default_factory=dict)
    output_format: str = "json"
    allow_large_n: bool = False
    checks: tuple | None = None

    def validate(self):
        if self.n < 1:
            raise ConfigError("n: must be >= 1")
        if self.n > N_CEILING and not self.allow_large_n:
            raise ConfigError(f"n: values above {N_CEILING} need --allow-large-n")
        self.kappa_grid.validate()
        for name in ("r_min", "r_max", "step"):
            v = getattr(self, name)
            if v is not None and not math.isfinite(v):
                raise ConfigError(f"{name}: must be finite")
        if self.step is not None and self.step <= 0:
            raise ConfigError("step: must be positive")
        if self.r_min is not None and self.r_min < 0:
            raise ConfigError("r_min: must be >= 0")
        if self.r_min is not None and self.r_max is not None and self.r_max < self.r_min:
            raise ConfigError("r_max: must be >= r_min")
        for key, tol in self.tolerances.items():
            if key != "all" and key not in REGISTRY:
                raise ConfigError(f"tolerances: unknown check {key!r}")
            if not tol > 0:
                raise ConfigError(f"tolerances[{key}]: must be positive")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("output_format: must be 'csv' or 'json'")
        if self.checks is not None:
            unknown = [c for c in self.checks if c not in REGISTRY]
            if unknown:
                raise ConfigError(f"checks: unknown check name(s) {', '.join(unknown)}")
        return self

    def r_grid(self, r_min: float, r_max: float, step: float) -> np.ndarray:
        """Evenly spaced r values; the config's own values override the defaults."""
        lo = r_min if self.r_min is None else self.r_min
        hi = r_max if self.r_max is None else self.r_max
        h = step if self.step is None else self.step
        count = int(math.floor((hi - lo) / h + 1e-9)) + 1
        if count < 1 or hi < lo:
            raise ConfigError("r grid: empty")
        return lo + h * np.arange(count)

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, self.tolerances.get("all", DEFAULT_TOLERANCES[name])))


@dataclass(frozen=True)
class VerificationReport:
    check_name: str
    params: dict
    grid: str
    max_abs_error: float | None
    tolerance: float
    passed: bool
    runtime_ms: int

    def __post_init__(self):
        if self.check_name not in REGISTRY:
            raise ValueError(f"unknown check {self.check_name!r}")
        ok = self.max_abs_error is not None and self.max_abs_error <= self.tolerance
        if ok != self.passed:
            raise ValueError("passed must equal (max_abs_error <= tolerance)")


@dataclass
class _Outcome:
    params: dict
    grid: str
    error: float


def _jitter(values: np.ndarray, scale: float) -> np.ndarray:
    """Optional reproducible jitter of interior sample points (``SUSYQM_SEED``)."""
    seed = os.environ.get(SEED_ENV)
    if not seed or values.size < 3:
        return values
    rng = np.random.default_rng(int(seed))
    out = values.copy()
    out[1:-1] += rng.uniform(-0.25, 0.25, values.size - 2) * scale
    return out


def _n_range(cfg):
    return range(1, cfg.n + 1)


# ---------------------------------------------------------------- checks


def _eq13(cfg):
    r = _jitter(np.linspace(0, 10, 401), 0.025)
    err = 0.0
    for N in range(1, 9):
        v = log_det_second_derivative(DetSystem.deep(N), r) * -2
        err = max(err, float(np.max(np.abs(v + N * (N + 1) / np.cosh(r) ** 2))))
    return _Outcome({"N_max": 8}, "r in [0, 10], 401 points", err)


def _eq60(cfg):
    r = _jitter(np.linspace(0, 10, 201), 0.05)
    err = 0.0
    for N in range(1, 9):
        got = det_m(DetSystem.deep(N), r)
        ref = closed_form_det_m(N, r)
        err = max(err, float(np.max(np.abs(got / ref - 1))))
    return _Outcome({"N_max": 8, "measure": "relative"}, "r in [0, 10], 201 points", err)


def _eq14(cfg):
    z = (np.arange(200) + 0.5) / 100 - 1  # 200 points in (-1, 1)
    x = np.arctanh(z)
    err = 0.0
    for N in range(1, 11):
        err = max(err, float(np.max(np.abs(eigenstate_sum_potential(N, x) + N * (N + 1) * (1 - z * z)))))
    return _Outcome({"N_max": 10}, "z in (-1, 1), 200 points", err)


def _eq10(cfg):
    r = _jitter(np.linspace(0.5, 6, 23), 0.25)
    err = 0.0
    for n in _n_range(cfg):
        for j in range(1, n + 1):
            chk = complex_shift_check(n, j, r)
            err = max(err, float(np.max(np.abs(chk.modulus_ratio - 1))), chk.phase_deviation)
    return _Outcome({"n_max": cfg.n}, "r in [0.5, 6], 23 points", err)


def _eq18(cfg):
    kappas = cfg.kappa_grid.values()
    err = 0.0
    for n in _n_range(cfg):
        exact = phase_shift_curve(n, kappas).deltas
        for method in (Method.DETERMINANT_RATIO, Method.NUMEROV):
            got = phase_shift_curve(n, kappas, method).deltas
            err = max(err, float(np.max(np.abs(got - exact))))
        # wavefunction itself against its large-r form, relative to the amplitude
        r = np.linspace(20, 30, 11)
        for k in kappas[:: max(1, kappas.size // 4)]:
            amp = float(np.prod(np.abs(np.arange(1, 2 * n + 1) - 1j * k)))
            diff = scatter_state_det(DetSystem.deep(2 * n), k, r) - asymptotic_form(n, k, r)
            err = max(err, float(np.max(np.abs(diff))) / amp)
    g = cfg.kappa_grid
    return _Outcome({"n_max": cfg.n, "routes": "closed form, determinant, numerov"},
                    f"kappa in [{g.min}, {g.max}], {g.count} points ({g.spacing})", err)


def _levinson_grid(cfg):
    return np.geomspace(1e-4, max(cfg.kappa_grid.max, 1.0), 60)


def _eq19(cfg):
    kappas = _levinson_grid(cfg)
    err = 0.0
    for n in _n_range(cfg):
        deep = phase_shift_curve(n, kappas, Method.NUMEROV)
        sing = phase_shift_curve(n, kappas, Method.NUMEROV, singular=True)
        err = max(err, deep.levinson_error(), sing.levinson_error())
    return _Outcome({"n_max": cfg.n, "kappa_min": 1e-4, "route": "numerov"},
                    "kappa log-spaced from 1e-4, 60 points", err)


def _eq22(cfg):
    kappas = cfg.kappa_grid.values()
    err = 0.0
    for n in _n_range(cfg):
        for method in (Method.DETERMINANT_RATIO, Method.NUMEROV):
            deep = phase_shift_curve(n, kappas, method).deltas
            sing = phase_shift_curve(n, kappas, method, singular=True).deltas
            err = max(err, float(np.max(np.abs(deep - sing - n * math.pi))))
    g = cfg.kappa_grid
    return _Outcome({"n_max": cfg.n, "routes": "determinant, numerov"},
                    f"kappa in [{g.min}, {g.max}], {g.count} points ({g.spacing})", err)


def _eq23(cfg):
    r = _jitter(cfg.r_grid(0.2, 8.0, 0.1), 0.1)
    if r[0] < 0.2:
        raise ConfigError("r_min: reconstruction needs r >= 0.2")
    err = 0.0
    for n in _n_range(cfg):
        for x in r:
            err = max(err, abs(pe.singular_from_deep(n, x) - 2 * n * (2 * n + 1) / math.sinh(x) ** 2))
    return _Outcome({"n_max": cfg.n}, f"r in [{r[0]:g}, {r[-1]:g}], {r.size} points", err)


def _eq24(cfg):
    r = np.geomspace(0.05, 10, 40)
    err, cond = 0.0, 0.0
    for n in _n_range(cfg):
        for x in r:
            phi, c = pe.partner_states_solve(n, x, return_cond=True)
            exact = np.array([partner_state(n, j, x) for j in range(1, n + 1)])
            err = max(err, float(np.max(np.abs(phi - exact) / np.maximum(1.0, np.abs(exact)))))
            cond = max(cond, c)
    return _Outcome({"n_max": cfg.n, "measure": "abs/max(1,|phi|)", "max_condition_number": cond},
                    "r log-spaced in [0.05, 10], 40 points", err)


def _eq25(cfg):
    r = np.linspace(0.2, 8, 40)
    err = 0.0
    for n in _n_range(cfg):
        for x in r:
            err = max(err, pe.logdet_derivative_identity(n, x))
        # integrating from r to infinity leaves no constant: ln det F = n(2n+1) ln tanh r
        const = pe.log_det_overlap(n, r) - n * (2 * n + 1) * np.log(np.tanh(r))
        err = max(err, float(np.max(np.abs(const))))
    return _Outcome({"n_max": cfg.n}, "r in [0.2, 8], 40 points", err)


def _eq26_27(cfg):
    n_max = max(5, cfg.n)
    z = (np.arange(200) + 0.5) / 200
    r = np.linspace(0.05, 8, 200)
    err = 0.0
    for n in range(1, n_max + 1):
        lhs, rhs = pe.legendre_product_identity(n, z)
        err = max(err, float(np.max(np.abs(lhs - rhs) / np.abs(lhs))))
        lhs, rhs = pe.product_sum_identity(n, r)
        err = max(err, float(np.max(np.abs(lhs - rhs) / np.abs(lhs))))
    return _Outcome({"n_max": n_max, "measure": "relative"},
                    "z in (0, 1), 200 points; r in [0.05, 8], 200 points", err)


def _eq36_37(cfg):
    err = 0.0
    for n in _n_range(cfg):
        for k in (0.5, 1.0, 2.0, 3.0):
            for x in (1.0, 2.0, 3.0, 5.0):
                a = pe.general_wavefunction_transform(n, k, x)
                b = pe.wronskian_wavefunction_transform(n, k, x)
                err = max(err, abs(a - b) / max(1.0, abs(a)))
                if n == 1:
                    # determinant states are the negatives of the closed forms
                    err = max(err, abs(-a - float(scattering_state_n1(k, x, singular=True))))
    return _Outcome({"n_max": cfg.n, "kappas": "0.5,1,2,3", "measure": "abs/max(1,|phi|)"},
                    "r in {1, 2, 3, 5}", err)


def _eq39(cfg):
    err = 0.0
    for k in (0.5, 1.0, 2.0, 3.0):
        err = max(err, abs(integral_phase_check_n1(k) - 1))
        for n in _n_range(cfg):
            err = max(err, abs(integral_phase_check(n, k) - 1))
    return _Outcome({"n_max": cfg.n, "kappas": "0.5,1,2,3"}, "r in [0, inf)", err)


def _eq40(cfg):
    err = 0.0
    for k in (0.5, 1.0, 2.0, 5.0, 10.0, 50.0):
        x = k * math.pi
        closed = 3 / k * (1 - 2 * x * math.exp(-x) / (-math.expm1(-2 * x)))
        err = max(err, abs(born_phase_quadrature(k) - closed))
    return _Outcome({"kappas": "0.5,1,2,5,10,50"}, "r in [0, inf)", err)


def _eq53_55(cfg):
    x = _jitter(np.linspace(-4, 4, 81), 0.1)
    err = 0.0
    for N in range(1, 9):
        chain = ladder_descend(N)
        if chain.strengths != tuple(k * (k + 1) for k in range(N, -1, -1)):
            raise ArithmeticError(f"ladder strengths for N={N}: {chain.strengths}")
        if chain.xi_exponent != N * (N + 1) // 2:
            raise ArithmeticError(f"xi exponent for N={N}: {chain.xi_exponent}")
        for j in range(N):
            legendre = full_line_normalizer(N, N - j) * legendre_inside((N, N - j), np.tanh(x), root=1 / np.cosh(x))
            err = max(err, float(np.max(np.abs(appendix_derivative_form(N, j, x) - legendre))))
    return _Outcome({"N_max": 8}, "x in [-4, 4], 81 points", err)


REGISTRY: dict[str, Callable[[RunConfig], _Outcome]] = {
    "eq10_complex_shift": _eq10,
    "eq13_potential": _eq13,
    "eq14_identity": _eq14,
    "eq18_asymptotics": _eq18,
    "eq19_levinson": _eq19,
    "eq22_phase_equivalence": _eq22,
    "eq23_singular_reconstruction": _eq23,
    "eq24_partner_solve": _eq24,
    "eq25_logdet": _eq25,
    "eq26_27_identity": _eq26_27,
    "eq36_37_transform": _eq36_37,
    "eq39_integral": _eq39,
    "eq40_born": _eq40,
    "eq53_55_representation": _eq53_55,
    "eq60_detm": _eq60,
}

DEFAULT_TOLERANCES = {
    "eq10_complex_shift": 1e-8,
    "eq13_potential": 1e-6,
    "eq14_identity": 1e-9,
    "eq18_asymptotics": 1e-4,
    "eq19_levinson": 1e-2,
    "eq22_phase_equivalence": 1e-6,
    "eq23_singular_reconstruction": 1e-5,
    "eq24_partner_solve": 1e-8,
    "eq25_logdet": 1e-6,
    "eq26_27_identity": 1e-9,
    "eq36_37_transform": 1e-8,
    "eq39_integral": 1e-6,
    "eq40_born": 1e-8,
    "eq53_55_representation": 1e-8,
    "eq60_detm": 1e-8,
}

# numerical failures inside a check are recorded in its report; anything else propagates
_CHECK_FAILURES = (ArithmeticError, AssertionError, QuadratureError, SingularMatrixError,
                   RepresentationMismatch, np.linalg.LinAlgError)


def run_check(name: str, cfg: RunConfig) -> VerificationReport:
    if name not in REGISTRY:
        raise ConfigError(f"checks: unknown check name {name!r}")
    tol = cfg.tolerance(name)
    start = time.perf_counter()
    try:
        out = REGISTRY[name](cfg)
        params, grid, error = out.params, out.grid, float(out.error)
        if not math.isfinite(error):
            error = None
    except _CHECK_FAILURES as exc:
        params, grid, error = {"failure": f"{type(exc).__name__}: {exc}"}, "", None
    elapsed = int(round((time.perf_counter() - start) * 1000))
    passed = error is not None and error <= tol
    return VerificationReport(name, params, grid, error, tol, passed, elapsed)


def run_all(cfg: RunConfig) -> list[VerificationReport]:
    cfg.validate()
    names = sorted(cfg.checks) if cfg.checks else sorted(REGISTRY)
    return [run_check(name, cfg) for name in names]


# ---------------------------------------------------------------- serialization


def format_float_json(x: float) -> str:
    """17 significant digits, always recognisable as a float."""
    if not math.isfinite(x):
        raise ValueError("non-finite floats have no JSON form")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def encode_json(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float_json(float(v))
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, Mapping):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {encode_json(val)}" for k, val in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(encode_json(x) for x in v) + "]"
    raise TypeError(f"cannot encode {type(v).__name__}")


def reports_to_json(reports) -> str:
    rows = [{c: getattr(rep, c) for c in REPORT_COLUMNS} for rep in reports]
    if not rows:
        return "[]\n"
    return "[\n" + ",\n".join("  " + encode_json(row) for row in rows) + "\n]\n"


def reports_from_json(text: str) -> list[VerificationReport]:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("expected a JSON array")
    out = []
    for item in data:
        if set(item) != set(REPORT_COLUMNS):
            raise ValueError(f"report fields must be exactly {REPORT_COLUMNS}")
        out.append(VerificationReport(**item))
    return out


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".9g")
    if isinstance(v, Mapping):
        return encode_json(v)
    return str(v)


def table_to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def reports_to_csv(reports) -> str:
    return table_to_csv(REPORT_COLUMNS, [[getattr(rep, c) for c in REPORT_COLUMNS] for rep in reports])
