"""
``susyqm`` command line.

Exit status: 0 when everything ran (and, for verify-all, every check
passed), 1 when at least one check failed, 2 for usage or configuration
errors.  Tables go to stdout unless ``--out`` is given.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import phase_equiv as pe
from .potentials import PotentialModel, bound_state, eval_potential, legendre_square_sum, partner_state
from .scattering import Method, phase_shift_curve
from .soliton_matrices import DetSystem, log_det_second_derivative
from .verify import (
    ConfigError,
    KappaGrid,
    RunConfig,
    encode_json,
    reports_to_csv,
    reports_to_json,
    run_all,
    table_to_csv,
)

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

POTENTIAL_COLUMNS = ("r", "v_deep", "v_singular", "v_determinant", "abs_error")
SCATTER_COLUMNS = ("kappa", "delta_analytic", "delta_determinant", "delta_numerov",
                   "delta_singular_analytic", "delta_singular_numerov", "delta_difference")
PHASE_EQUIV_COLUMNS = ("r", "v_reconstructed", "v_singular", "reconstruction_error",
                       "logdet_residual", "partner_solve_error", "condition_number")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _tol_pair(text):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {name!r} is not a number") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="susyqm", description="Reflectionless sech^2 potentials, their singular "
                "phase-equivalent partners, and numerical checks of their identities.")
    p.add_argument("command", choices=["potential", "boundstates", "scatter", "phase-equiv", "identity",
                                       "verify-all"])
    p.add_argument("--n", type=int, default=None, help="bound-state count (verify-all: ceiling, default 3)")
    p.add_argument("--allow-large-n", action="store_true", help="permit n above 3")
    p.add_argument("--kappa-min", type=float, default=0.3)
    p.add_argument("--kappa-max", type=float, default=5.0)
    p.add_argument("--kappa-count", type=int, default=24)
    p.add_argument("--kappa-spacing", choices=["linear", "log"], default="linear")
    p.add_argument("--r-min", type=float, default=None)
    p.add_argument("--r-max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--points", type=int, default=200, help="z samples for the identity table")
    p.add_argument("--tol", type=_tol_pair, action="append", default=[], metavar="NAME=F",
                   help="override a check tolerance (NAME may be 'all')")
    p.add_argument("--check", action="append", default=None, metavar="NAME",
                   help="run only this verify-all check (repeatable)")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    return p


def _config(args) -> RunConfig:
    n = args.n if args.n is not None else (3 if args.command == "verify-all" else 1)
    cfg = RunConfig(
        n=n,
        kappa_grid=KappaGrid(args.kappa_min, args.kappa_max, args.kappa_count, args.kappa_spacing),
        r_min=args.r_min,
        r_max=args.r_max,
        step=args.step,
        tolerances=dict(args.tol),
        output_format=args.format or ("json" if args.command == "verify-all" else "csv"),
        allow_large_n=args.allow_large_n,
        checks=tuple(args.check) if args.check else None,
    )
    return cfg.validate()


# ---------------------------------------------------------------- tables


def _table_output(cfg, columns, rows, extra=None):
    if cfg.output_format == "csv":
        return table_to_csv(columns, rows)
    doc = {"columns": list(columns), "rows": [[_plain(v) for v in row] for row in rows]}
    if extra:
        doc.update(extra)
    return encode_json(doc) + "\n"


def _plain(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def cmd_potential(cfg: RunConfig):
    r = cfg.r_grid(0.1, 5.0, 0.1)
    n = cfg.n
    v_d = eval_potential(PotentialModel.deep(n), r)
    with np.errstate(divide="ignore"):
        v_s = np.where(r > 0, 2 * n * (2 * n + 1) / np.sinh(np.where(r > 0, r, 1.0)) ** 2, np.inf)
    v_det = -2 * log_det_second_derivative(DetSystem.deep(2 * n), r)
    rows = [(a, b, c, d, abs(d - b)) for a, b, c, d in zip(r, v_d, v_s, v_det)]
    return _table_output(cfg, POTENTIAL_COLUMNS, rows), EXIT_OK


def cmd_boundstates(cfg: RunConfig):
    r = cfg.r_grid(0.1, 5.0, 0.1)
    if r[0] <= 0:
        raise ConfigError("r_min: partner states need r > 0")
    n = cfg.n
    cols = ["r"] + [f"psi_{j}" for j in range(1, n + 1)] + [f"phi_{j}" for j in range(1, n + 1)]
    data = [r] + [bound_state(n, j, r) for j in range(1, n + 1)] + [partner_state(n, j, r) for j in range(1, n + 1)]
    rows = list(zip(*data))
    energies = {f"energy_{j}": float(-(2 * j - 1) ** 2) for j in range(1, n + 1)}
    return _table_output(cfg, cols, rows, {"energies": energies}), EXIT_OK


def _levinson_summary(n):
    kappas = np.geomspace(1e-4, 5.0, 60)
    deep = phase_shift_curve(n, kappas, Method.NUMEROV)
    sing = phase_shift_curve(n, kappas, Method.NUMEROV, singular=True)
    return {
        "bound_states": n,
        "kappa": 1e-4,
        "delta": deep.zero_energy_limit(),
        "delta_singular": sing.zero_energy_limit(),
        "n_pi": n * math.pi,
        "error": deep.levinson_error(),
        "error_singular": sing.levinson_error(),
    }


def cmd_scatter(cfg: RunConfig):
    n, kappas = cfg.n, cfg.kappa_grid.values()
    exact = phase_shift_curve(n, kappas).deltas
    det = phase_shift_curve(n, kappas, Method.DETERMINANT_RATIO).deltas
    num = phase_shift_curve(n, kappas, Method.NUMEROV).deltas
    s_exact = phase_shift_curve(n, kappas, singular=True).deltas
    s_num = phase_shift_curve(n, kappas, Method.NUMEROV, singular=True).deltas
    rows = list(zip(kappas, exact, det, num, s_exact, s_num, num - s_num))
    summary = _levinson_summary(n)
    if cfg.output_format == "csv":
        line = ("levinson: n={bound_states} delta({kappa:g})={delta:.9g} n*pi={n_pi:.9g} error={error:.3g}; "
                "singular delta={delta_singular:.9g} error={error_singular:.3g}").format(**summary)
        print(line, file=sys.stderr)
        return table_to_csv(SCATTER_COLUMNS, rows), EXIT_OK
    return _table_output(cfg, SCATTER_COLUMNS, rows, {"levinson": summary}), EXIT_OK


def cmd_phase_equiv(cfg: RunConfig):
    n = cfg.n
    r = cfg.r_grid(0.2, 8.0, 0.2)
    if r[0] < pe.R_SOLVE_MIN:
        raise ConfigError(f"r_min: must be >= {pe.R_SOLVE_MIN}")
    rows = []
    for x in r:
        v = pe.singular_from_deep(n, x)
        exact_v = 2 * n * (2 * n + 1) / math.sinh(x) ** 2
        phi, cond = pe.partner_states_solve(n, x, return_cond=True)
        closed = np.array([partner_state(n, j, x) for j in range(1, n + 1)])
        solve_err = float(np.max(np.abs(phi - closed) / np.maximum(1.0, np.abs(closed))))
        rows.append((x, v, exact_v, abs(v - exact_v), pe.logdet_derivative_identity(n, x), solve_err, cond))
    return _table_output(cfg, PHASE_EQUIV_COLUMNS, rows), EXIT_OK


def cmd_identity(cfg: RunConfig, points: int):
    if points < 1:
        raise ConfigError("points: must be >= 1")
    n = cfg.n
    N = 2 * n
    z = (np.arange(points) + 0.5) / points
    sq_lhs = N * (N + 1) * (1 - z * z)
    sq_rhs = legendre_square_sum(N, z)
    prod_lhs, prod_rhs = pe.legendre_product_identity(n, z)
    cols = ("z", "square_sum_lhs", "square_sum_rhs", "product_sum_lhs", "product_sum_rhs", "product_sum_rel_error")
    rows = list(zip(z, sq_lhs, sq_rhs, prod_lhs, prod_rhs, np.abs(prod_lhs - prod_rhs) / np.abs(prod_lhs)))
    return _table_output(cfg, cols, rows), EXIT_OK


def cmd_verify_all(cfg: RunConfig):
    reports = run_all(cfg)
    text = reports_to_json(reports) if cfg.output_format == "json" else reports_to_csv(reports)
    return text, EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "potential":
            text, status = cmd_potential(cfg)
        elif args.command == "boundstates":
            text, status = cmd_boundstates(cfg)
        elif args.command == "scatter":
            text, status = cmd_scatter(cfg)
        elif args.command == "phase-equiv":
            text, status = cmd_phase_equiv(cfg)
        elif args.command == "identity":
            text, status = cmd_identity(cfg, args.points)
        else:
            text, status = cmd_verify_all(cfg)
    except ConfigError as exc:
        print(f"susyqm: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"susyqm: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
