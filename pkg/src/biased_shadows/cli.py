"""Command-line front end: seeded, reproducible runs writing self-describing CSV.

Subcommands: loss-curve, worst-case, best-case, snr, experiment, combined,
density-samples.  Exit status 0 on success, 2 on invalid parameters, 3 on
I/O failure; errors go to stderr as one JSON object.  The default output
directory is taken from BIASED_SHADOWS_OUTDIR.
"""

import argparse
import json
import os
import sys

from . import analytics, spinring
from .pauli import PauliString
from .tables import format_value, write_table

OUTDIR_ENV = "BIASED_SHADOWS_OUTDIR"


class CliError(Exception):
    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.exit_code = exit_code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, 2)


def _floats(text: str):
    try:
        return [float(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise CliError(f"expected comma-separated floats, got {text!r}")


def _ints(text: str):
    try:
        return [int(tok) for tok in text.split(",") if tok != ""]
    except ValueError:
        raise CliError(f"expected comma-separated integers, got {text!r}")


def _grid(text: str):
    """start:end:count, inclusive endpoints."""
    parts = text.split(":")
    if len(parts) != 3:
        raise CliError(f"epsilon grid must be start:end:count, got {text!r}")
    try:
        start, end, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise CliError(f"malformed epsilon grid {text!r}")
    if count < 1 or (count == 1 and start != end):
        raise CliError(f"epsilon grid needs count >= 2 (or start == end), got {text!r}")
    if count == 1:
        values = [start]
    else:
        step = (end - start) / (count - 1)
        values = [start + i * step for i in range(count - 1)] + [end]
    spec = {"start": start, "end": end, "count": count}
    return spec, values


def build_parser() -> _Parser:
    parser = _Parser(prog="biased-shadows", description=__doc__)
    parser.add_argument("--config", help="JSON file with flag defaults for the subcommand")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("-o", "--output", help="exact output path (overrides --output-dir)")
        p.add_argument("--output-dir", default=None,
                       help=f"output directory (default ${OUTDIR_ENV} or '.')")

    p = sub.add_parser("loss-curve", help="average-case loss vs epsilon")
    p.add_argument("--r-norm", default="1.0", help="comma-separated Bloch norms")
    p.add_argument("--epsilon-grid", default="0:1:101")
    common(p)

    p = sub.add_parser("worst-case", help="exact worst-case relative MSE curves")
    p.add_argument("--w", default="1,2,4", help="comma-separated Pauli weights")
    p.add_argument("--n-s", default="10,100,1000", help="comma-separated shot counts")
    p.add_argument("--epsilon-grid", default="0:0.99:100")
    p.add_argument("--closed-form", action="store_true",
                   help="use the second-moment closed form (any n_s)")
    common(p)

    p = sub.add_parser("best-case", help="Monte-Carlo best-case relative MSE curves")
    p.add_argument("--w", default="1,2")
    p.add_argument("--n-s", default="10,100")
    p.add_argument("--epsilon-grid", default="0:1:21")
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    p = sub.add_parser("snr", help="SNR / optimal-bias report for a mean estimator")
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--variance", type=float, required=True)
    p.add_argument("--n-s", type=int, required=True)
    common(p)

    p = sub.add_parser("experiment", help="spin-ring three-strategy MSE experiment")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--coupling", type=float, default=0.3)
    p.add_argument("--omega-seed", type=int, default=0)
    p.add_argument("--n-s", type=int, default=10_000)
    p.add_argument("--w", type=int, default=6)
    p.add_argument("--n-obs", type=int, default=20)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split-plugin", action="store_true",
                   help="estimate alpha* on the first half of each collection")
    p.add_argument("--max-draw-factor", type=int, default=50)
    common(p)

    p = sub.add_parser("combined", help="combined estimator of tr[(H+P) rho]")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--coupling", type=float, default=0.3)
    p.add_argument("--omega-seed", type=int, default=0)
    p.add_argument("--n-s", type=int, default=10_000)
    p.add_argument("--observable", required=True,
                   help="Pauli letters of the perturbation, e.g. XXIZYZIX")
    p.add_argument("--coefficient", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha-override", type=float, default=None)
    common(p)

    p = sub.add_parser("density-samples", help="Fig.-1 cloud of averaged estimates")
    p.add_argument("--rx", type=float, default=0.0)
    p.add_argument("--ry", type=float, default=0.0)
    p.add_argument("--rz", type=float, default=spinring.DENSITY_DEFAULT_RZ)
    p.add_argument("--n-s", type=int, default=100)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--n-points", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    common(p)

    return parser


def _resolve_output(args, default_name: str) -> str:
    if getattr(args, "output", None):
        return args.output
    outdir = getattr(args, "output_dir", None) or os.environ.get(OUTDIR_ENV) or "."
    return os.path.join(outdir, default_name)


def _run_loss_curve(args):
    r_norms = _floats(args.r_norm)
    grid_spec, eps = _grid(args.epsilon_grid)
    rows = analytics.loss_curve_rows(r_norms, eps)
    config = {"subcommand": "loss-curve", "r_norms": r_norms, "epsilon_grid": grid_spec}
    path = _resolve_output(args, "loss_curve.csv")
    write_table(path, config, ("epsilon", "r_norm", "loss"), rows)
    return path


def _run_worst_case(args):
    ws = _ints(args.w)
    n_ss = _ints(args.n_s)
    grid_spec, eps = _grid(args.epsilon_grid)
    rows = analytics.worst_case_rows(ws, n_ss, eps, closed_form=args.closed_form)
    config = {"subcommand": "worst-case", "w": ws, "n_s": n_ss,
              "epsilon_grid": grid_spec, "closed_form": args.closed_form}
    path = _resolve_output(args, "worst_case.csv")
    write_table(path, config, ("epsilon", "w", "n_s", "mse", "relative_mse"), rows)
    return path


def _run_best_case(args):
    ws = _ints(args.w)
    n_ss = _ints(args.n_s)
    grid_spec, eps = _grid(args.epsilon_grid)
    rows = analytics.best_case_rows(ws, n_ss, eps, reps=args.reps, seed=args.seed)
    config = {"subcommand": "best-case", "w": ws, "n_s": n_ss,
              "epsilon_grid": grid_spec, "reps": args.reps, "seed": args.seed}
    path = _resolve_output(args, "best_case.csv")
    write_table(path, config,
                ("epsilon", "w", "n_s", "mse", "standard_error", "relative_mse"),
                rows)
    return path


def _run_snr(args):
    report = analytics.snr(args.mean, args.variance, args.n_s)
    payload = json.loads(report.to_json())
    payload.update({"subcommand": "snr", "mean": args.mean,
                    "variance": args.variance, "n_s": args.n_s})
    text = json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
    sys.stdout.write(text)
    if args.output:
        path = _resolve_output(args, "snr.json")
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w") as handle:
            handle.write(text)
        return path
    return None


def _run_experiment(args):
    spec, _ = spinring.build_spin_ring(args.n, args.coupling, args.omega_seed)
    report = spinring.perturbation_experiment(
        spec, args.n_s, args.w, args.n_obs, args.reps, args.seed,
        split_plugin=args.split_plugin, max_draw_factor=args.max_draw_factor)
    config = dict(report.config)
    config.update({"subcommand": "experiment", "ground_energy": report.ground_energy,
                   "draws_used": report.draws_used,
                   "filter_exhausted": report.filter_exhausted})
    name = f"experiment_n{args.n}_w{args.w}_ns{args.n_s}_seed{args.seed}.csv"
    path = _resolve_output(args, name)
    write_table(path, config, report.csv_columns(), report.csv_rows())
    return path


def _run_combined(args):
    spec, _ = spinring.build_spin_ring(args.n, args.coupling, args.omega_seed)
    p = PauliString(args.observable.upper(), args.coefficient)
    report = spinring.combined_estimator_demo(
        spec, args.n_s, p, args.reps, args.seed, alpha_override=args.alpha_override)
    config = dict(report.config)
    config.update({
        "subcommand": "combined", "exact_value": report.exact_value,
        "beta": report.beta, "alpha_star": report.alpha_star,
        "diff_biased_minus_drop": report.diff_biased_minus_drop,
        "se_diff_biased_minus_drop": report.se_diff_biased_minus_drop,
        "diff_biased_minus_unbiased": report.diff_biased_minus_unbiased,
        "se_diff_biased_minus_unbiased": report.se_diff_biased_minus_unbiased,
    })
    w = p.weight
    name = f"combined_n{args.n}_w{w}_ns{args.n_s}_seed{args.seed}.csv"
    path = _resolve_output(args, name)
    write_table(path, config, report.csv_columns(), report.csv_rows())
    return path


def _run_density_samples(args):
    table = spinring.emit_density_samples(
        (args.rx, args.ry, args.rz), n_s=args.n_s, n_points=args.n_points,
        epsilon=args.epsilon, seed=args.seed)
    config = dict(table.config)
    config["subcommand"] = "density-samples"
    name = (f"density_ns{args.n_s}_eps{format_value(args.epsilon)}"
            f"_seed{args.seed}.csv")
    path = _resolve_output(args, name)
    write_table(path, config, table.columns, table.data)
    return path


_HANDLERS = {
    "loss-curve": _run_loss_curve,
    "worst-case": _run_worst_case,
    "best-case": _run_best_case,
    "snr": _run_snr,
    "experiment": _run_experiment,
    "combined": _run_combined,
    "density-samples": _run_density_samples,
}


def _load_config_defaults(parser, argv):
    """Apply --config file values as subcommand defaults, then reparse."""
    probe, _ = parser.parse_known_args(argv)
    if not getattr(probe, "config", None):
        return parser.parse_args(argv)
    try:
        with open(probe.config) as handle:
            file_cfg = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config file {probe.config}: {exc}", 2)
    if not isinstance(file_cfg, dict):
        raise CliError("config file must hold one JSON object", 2)
    defaults = {k.replace("-", "_"): v for k, v in file_cfg.items()
                if k != "subcommand"}
    parser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        parser = build_parser()
        args = _load_config_defaults(parser, argv)
        try:
            path = _HANDLERS[args.subcommand](args)
        except ValueError as exc:
            raise CliError(str(exc), 2) from exc
        if path is not None:
            sys.stderr.write(f"wrote {path}\n")
        return 0
    except CliError as exc:
        sys.stderr.write(json.dumps(
            {"error": str(exc), "exit_code": exc.exit_code}) + "\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "exit_code": 3}) + "\n")
        return 3


def console_main() -> None:
    sys.exit(main())
