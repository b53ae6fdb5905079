"""``qdistill`` command line: sweep, peak and validate.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical error.
"""

import argparse
import io
import json
import sys

from . import cavity, spectral, validation
from .cavity import Coherent
from .config import COLUMNS, dumps, load_config
from .errors import ConfigurationError, NumericalError

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def format_number(value):
    """CSV cell text: empty for missing, at most 12 significant digits otherwise."""
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".12g")


def sweep_table(config):
    """Rows of the sweep CSV as dictionaries keyed by column name.

    Also returns the list of ``(N, message)`` for rows whose exact columns
    failed.
    """
    params, state = config.model, config.state
    kernel = cavity.make_kernel(params, state)
    rho = cavity.initial_density(state)
    series = spectral.run_series(kernel, rho, config.n_values,
                                 abs_tol=config.abs_tol, rel_tol=config.rel_tol)
    coherent = isinstance(params.cavity, Coherent)
    table, failures = [], []
    for row in series.rows:
        if row.p_exact is None or row.pi_exact is None:
            failures.append((row.n, row.error))
        if coherent:
            p_closed = cavity.survival_closed_coherent(params, state, row.n)
            pi_closed = cavity.purity_closed_coherent(params, state, row.n)
        else:
            p_closed = cavity.survival_asym_number1(params, state, row.n) if row.n >= 1 else None
            pi_closed = None
        table.append({
            "N": row.n, "P_exact": row.p_exact, "Pi_exact": row.pi_exact,
            "P_asym": row.p_asym, "Pi_asym": row.pi_asym, "Delta_N": row.delta_n,
            "P_closed": p_closed, "Pi_closed": pi_closed,
        })
    return table, failures


def write_csv(table, columns, stream):
    stream.write(",".join(columns) + "\n")
    for row in table:
        stream.write(",".join(format_number(row[c]) for c in columns) + "\n")


def cmd_sweep(args):
    config = load_config(args.config)
    table, failures = sweep_table(config)
    buffer = io.StringIO()
    write_csv(table, [c for c in COLUMNS if c in config.outputs], buffer)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buffer.getvalue())
    else:
        sys.stdout.write(buffer.getvalue())
    if failures:
        for n, message in failures:
            print(f"qdistill: numerical error in row N={n}: {message}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def peak_report(config):
    kernel = cavity.make_kernel(config.model, config.state)
    e_star = spectral.locate_peak(kernel)
    data = spectral.laplace_data(kernel, e_star)
    n = config.reference_n
    return {
        "e_star": data.e_star,
        "big_lambda_star": data.big_lambda_star,
        "curvature": data.curvature,
        "reference_n": n,
        "delta_n": spectral.delta_n(data, n),
    }


def cmd_peak(args):
    report = peak_report(load_config(args.config))
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(f"e_star           {report['e_star']:.12g}")
        print(f"big_lambda_star  {report['big_lambda_star']:.12g}")
        print(f"curvature        {report['curvature']:.12g}")
        print(f"delta_n(N={report['reference_n']})  {report['delta_n']:.12g}")
    return EXIT_OK


def cmd_validate(args):
    results = validation.validate(load_config(args.config))
    for result in results:
        print(result.line())
    print(validation.summary_line(results))
    return EXIT_OK if validation.passed(results, strict=args.strict) else EXIT_VALIDATION


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qdistill",
        description="Distillation by repeated measurements with a continuous spectrum.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="TOML experiment configuration")
    common.add_argument("--dump-config", action="store_true",
                        help="print the effective configuration and exit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common], help="CSV of P(N) and Pi(N) per N")
    p.add_argument("--out", help="write the CSV here instead of standard output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("peak", parents=[common], help="selected point and filter curvature")
    p.add_argument("--json", action="store_true", help="emit JSON")
    p.set_defaults(func=cmd_peak)

    p = sub.add_parser("validate", parents=[common], help="run the self-consistency checks")
    p.add_argument("--strict", action="store_true", help="treat warnings as failures")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.dump_config:
            sys.stdout.write(dumps(load_config(args.config)))
            return EXIT_OK
        return args.func(args)
    except ConfigurationError as exc:
        print(f"qdistill: configuration error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"qdistill: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
