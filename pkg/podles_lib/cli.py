"""Command-line interface."""

import argparse
from pathlib import Path
import sys
from typing import TextIO

from podles_lib import __version__, colors
from podles_lib.algebra import ParseError, format_element, make_presentation, normal_form, parse_element, star
from podles_lib.config import DEFAULT_PATH, Config
from podles_lib.constants import REGIME_FINITE, REGIME_INFINITE, REP_KINDS
from podles_lib.qrat import HalfInt, ParameterError, parse_c, parse_q
from podles_lib.report import Report, reports_pass
from podles_lib.reps import ParamSet, Rep, build_rep, coeff_table, parse_sign
from podles_lib.serialize import coeff_table_to_csv, load_rep, rep_to_json, reports_to_json, write_json
from podles_lib.verify import check_confluence, check_exact_relations, run_suite


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _config(args: argparse.Namespace) -> Config:
    config = Config(args.config)
    errors = config.validate()
    if errors:
        raise ParameterError(f"Invalid configuration in {config.path}: {', '.join(errors)}")
    return config


def _option(args: argparse.Namespace, config: Config, section: str, key: str):
    """CLI flag if given, else config file, else built-in default."""
    value = getattr(args, key, None)
    return config.get(section, key) if value is None else value


def params_from_args(args: argparse.Namespace, config: Config) -> ParamSet:
    """Assemble a ParamSet from flags and configuration."""
    phase = complex(_option(args, config, "params", "u_phase"))
    return ParamSet(
        q=parse_q(str(_option(args, config, "params", "q"))),
        c=parse_c(str(_option(args, config, "params", "c"))),
        sign=parse_sign(str(_option(args, config, "params", "sign"))),
        l0=HalfInt.of(str(_option(args, config, "params", "l0"))),
        h=float(_option(args, config, "params", "h")),
        y0=float(_option(args, config, "params", "y0")),
        u_phase=phase,
        cutoff=int(_option(args, config, "params", "cutoff")),
    )


def _l_max(args: argparse.Namespace, config: Config, params: ParamSet) -> HalfInt:
    if getattr(args, "lmax", None) is not None:
        return HalfInt.of(args.lmax)
    return params.l0 + int(config.get("params", "lmax_offset"))


def _build(args: argparse.Namespace, config: Config) -> Rep:
    params = params_from_args(args, config)
    return build_rep(
        args.rep,
        params,
        sector=args.sector,
        spin=args.spin,
        l_max=_l_max(args, config, params),
        variant=args.variant,
    )


def _emit(text: str, out: str | None) -> TextIO:
    """Write machine output to a file or stdout; return the stream for human output."""
    if out:
        Path(out).write_text(text, encoding="utf-8")
        return sys.stdout
    sys.stdout.write(text)
    return sys.stderr


def _print_report(report: Report, stream: TextIO) -> None:
    line = (
        f"{colors.verdict(report.passed)} {report.relation_id}  "
        f"{colors.dim('residual')} {report.max_residual:.3e}  "
        f"{colors.dim('checked')} {report.vectors_checked}  "
        f"{colors.dim('skipped')} {report.vectors_skipped}"
    )
    print(line, file=stream)
    if not report.passed:
        for detail in report.details:
            print(f"    {colors.dim(detail)}", file=stream)


def cmd_normal_form(args: argparse.Namespace) -> int:
    """Print the normal form of an element."""
    regime = REGIME_INFINITE if args.c is not None and parse_c(args.c) is None else REGIME_FINITE
    p = make_presentation(args.presentation, regime)
    x = parse_element(args.element, p)
    if args.star:
        x = star(x, p)
    print(format_element(normal_form(x, p), p))
    return EXIT_OK


def cmd_build(args: argparse.Namespace) -> int:
    """Build a representation and write its JSON document."""
    config = _config(args)
    rep = _build(args, config)
    stream = _emit(write_json(rep_to_json(rep), None), args.out)
    generators = ", ".join(sorted(rep.matrices))
    print(
        colors.green(f"✓ Built {rep.kind} representation: dimension {rep.dim}, generators {generators}"),
        file=stream,
    )
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    """Run the verification suite on a built or stored representation."""
    config = _config(args)
    rep = load_rep(args.input) if args.input else _build(args, config)
    tol = float(_option(args, config, "verify", "tol"))
    reports = check_exact_relations()
    if args.confluence:
        reports += check_confluence(int(config.get("verify", "confluence_len")))
    reports += run_suite(
        rep,
        tol=tol,
        seed=int(_option(args, config, "verify", "seed")),
        trials=int(_option(args, config, "verify", "trials")),
        max_len=int(_option(args, config, "verify", "max_len")),
    )
    stream = _emit(write_json(reports_to_json(reports), None), args.out)
    for report in reports:
        _print_report(report, stream)
    failed = sum(not report.passed for report in reports)
    summary = f"{len(reports)} checks, {failed} failed"
    print(colors.bold(colors.red(summary) if failed else colors.green(summary)), file=stream)
    return EXIT_OK if reports_pass(reports) else EXIT_FAILURE


def cmd_coeffs(args: argparse.Namespace) -> int:
    """Write the coefficient table as CSV."""
    config = _config(args)
    params = params_from_args(args, config)
    table = coeff_table(params, _l_max(args, config, params), args.variant)
    stream = _emit(coeff_table_to_csv(table), args.out)
    if args.out:
        print(colors.green(f"✓ Wrote {len(table.rows)} coefficient rows to {args.out}"), file=stream)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    """Re-serialize a stored representation."""
    rep = load_rep(args.input)
    stream = _emit(write_json(rep_to_json(rep), None), args.out)
    if args.out:
        print(colors.green(f"✓ Exported {rep.kind} representation to {args.out}"), file=stream)
    return EXIT_OK


def cmd_config(args: argparse.Namespace) -> int:
    """Show the effective configuration or write the defaults."""
    config = Config(args.config)
    if args.init:
        if config.path.exists():
            raise FileExistsError(f"{config.path} already exists")
        config.save()
        print(colors.green(f"✓ Wrote default configuration to {config.path}"))
        return EXIT_OK
    sys.stdout.write(config.dumps())
    for error in config.validate():
        print(colors.yellow(f"Warning: {error}"), file=sys.stderr)
    return EXIT_OK


def _params_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    group = parser.add_argument_group("parameters (default: config file, then built-in)")
    group.add_argument("--q", help="Deformation parameter in (0, 1) as a fraction, e.g. 1/2")
    group.add_argument("--c", help="Sphere parameter c >= 0 as a fraction, or inf")
    group.add_argument("--sign", choices=["+", "-"], help="Sign selecting lambda_+ or lambda_-")
    group.add_argument("--l0", help="Lowest spin l0 (half-integer, e.g. 1/2)")
    group.add_argument("--h", type=float, help="Scalar H of the first family (> 0)")
    group.add_argument("--y0", type=float, help="Scalar Y0 of the Yc representation (nonzero)")
    group.add_argument("--u-phase", dest="u_phase", type=complex, help="Unitary u of the sector 0 representation")
    group.add_argument("--cutoff", type=int, help="Truncation level for shift bases")
    group.add_argument("--lmax", help="Highest spin block of the second family (default: l0 + 6)")
    return parser


def _rep_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sector", choices=["+", "-", "0"], default="+", help="Sphere sector (default: +)")
    parser.add_argument("--spin", help="Spin for --rep spin (default: l0)")
    parser.add_argument(
        "--variant",
        choices=["limit", "printed"],
        default="limit",
        help="c = inf coefficient formulas (default: limit)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="podles",
        description="Representations of the Podles sphere cross product algebras",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=DEFAULT_PATH, help=f"Path to configuration file (default: {DEFAULT_PATH})")
    parser.add_argument("--no-color", action="store_true", help="Disable colored output")

    subparsers = parser.add_subparsers(dest="command", required=True)
    params = _params_parser()

    # normal-form
    nf_parser = subparsers.add_parser("normal-form", help="Reduce an element to normal form")
    nf_parser.add_argument("element", help="Element, e.g. 'E F - F E' or 'q^(1/2) * A B'")
    nf_parser.add_argument("--presentation", required=True, help="Presentation name, e.g. Podles or Cross")
    nf_parser.add_argument("--c", help="Use the c = inf presentation when set to inf")
    nf_parser.add_argument("--star", action="store_true", help="Apply the involution before reducing")
    nf_parser.set_defaults(func=cmd_normal_form)

    # build
    build_parser_ = subparsers.add_parser("build", parents=[params], help="Build a representation")
    build_parser_.add_argument("--rep", choices=REP_KINDS, required=True, help="Representation kind")
    _rep_options(build_parser_)
    build_parser_.add_argument("--out", help="Output JSON file (default: stdout)")
    build_parser_.set_defaults(func=cmd_build)

    # check
    check_parser = subparsers.add_parser("check", parents=[params], help="Run the verification suite")
    source = check_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--rep", choices=REP_KINDS, help="Representation kind")
    source.add_argument("--input", help="Stored representation JSON")
    _rep_options(check_parser)
    check_parser.add_argument("--tol", type=float, help="Residual tolerance (default: 1e-9)")
    check_parser.add_argument("--seed", type=int, help="Seed for random words")
    check_parser.add_argument("--trials", type=int, help="Number of random words")
    check_parser.add_argument("--max-len", dest="max_len", type=int, help="Maximum random word length")
    check_parser.add_argument("--confluence", action="store_true", help="Also check local confluence")
    check_parser.add_argument("--out", help="Output JSON file for reports (default: stdout)")
    check_parser.set_defaults(func=cmd_check)

    # coeffs
    coeffs_parser = subparsers.add_parser("coeffs", parents=[params], help="Emit the coefficient table as CSV")
    coeffs_parser.add_argument("--variant", choices=["limit", "printed"], default="limit", help="c = inf formulas")
    coeffs_parser.add_argument("--out", help="Output CSV file (default: stdout)")
    coeffs_parser.set_defaults(func=cmd_coeffs)

    # export
    export_parser = subparsers.add_parser("export", help="Re-serialize a stored representation")
    export_parser.add_argument("--input", required=True, help="Stored representation JSON")
    export_parser.add_argument("--out", help="Output JSON file (default: stdout)")
    export_parser.set_defaults(func=cmd_export)

    # config
    config_parser = subparsers.add_parser("config", help="Show or initialize the configuration file")
    config_parser.add_argument("--init", action="store_true", help="Write the defaults to the config path")
    config_parser.set_defaults(func=cmd_config)

    return parser


def run(argv: list[str] | None = None) -> int:
    """Parse arguments, dispatch and return the exit code.

    Usage errors from argparse raise SystemExit(2) as usual.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    colors.init(no_color=args.no_color)
    try:
        return args.func(args)
    except (ParameterError, ParseError) as e:
        print(colors.red(f"Error: {e}"), file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        print(colors.red(f"Error: {e}"), file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    """Main CLI entry point."""
    # Ensure utf-8 is used for IO encoding on all platforms. Specifically on Windows
    # this fixes encoding issues during console output in certain cases.
    sys.stdout.reconfigure(encoding="utf-8")  # ty: ignore[unresolved-attribute]
    sys.stderr.reconfigure(encoding="utf-8")  # ty: ignore[unresolved-attribute]
    sys.exit(run())


if __name__ == "__main__":
    main()
