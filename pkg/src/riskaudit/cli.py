"""Command-line interface: ``riskaudit {audit,bench-bias,bench-twogroup,render}``.

Exit codes: 0 success, 1 usage or configuration error, 2 data validation
error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, DataValidationError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

log = logging.getLogger("riskaudit")


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; remap to our usage code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in _csv_list(text)]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="riskaudit", description="Per-group fairness audit of risk scores.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("audit", help="audit a scored CSV table")
    a.add_argument("--input", help="CSV with score, outcome and sensitive attribute columns")
    a.add_argument("--config", help="JSON config file (flags override its keys)")
    a.add_argument("--out", dest="output_dir", help="output directory")
    a.add_argument("--seed", type=int)
    a.add_argument("--bootstrap", dest="n_bootstrap", type=int, metavar="N",
                   help="bootstrap replicates (0 = point estimates only)")
    a.add_argument("--ci-level", type=float)
    a.add_argument("--min-group-size", type=int)
    a.add_argument("--max-combo", dest="max_combination", type=int)
    a.add_argument("--metrics", type=_csv_list, metavar="LIST",
                   help="comma-separated subset of drmsce,ece-baselines,auroc,auprg,eur")
    a.add_argument("--attributes", dest="sensitive_attributes", type=_csv_list, metavar="LIST",
                   help="comma-separated sensitive attribute columns")
    a.add_argument("--workers", type=int, help="parallel worker processes")

    b = sub.add_parser("bench-bias", help="calibration-metric sample-size bias study")
    b.add_argument("--config", help="JSON study config")
    b.add_argument("--out", default="bench-bias-out")
    b.add_argument("--seed", type=int)
    b.add_argument("--sizes", type=_int_list, help="comma-separated sample sizes")
    b.add_argument("--repetitions", type=int)

    t = sub.add_parser("bench-twogroup", help="audit the synthetic two-group ranking example")
    t.add_argument("--out", default="bench-twogroup-out")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--n-per-group", type=int, default=20000)
    t.add_argument("--bootstrap", type=int, default=200, metavar="N")
    t.add_argument("--workers", type=int, default=1)

    r = sub.add_parser("render", help="draw SVG images from an audit's curve files")
    r.add_argument("audit_dir", help="directory written by `riskaudit audit`")
    r.add_argument("--out", help="image directory (default: <audit_dir>/plots)")
    return p


def _cmd_audit(args) -> int:
    from .audit import emit_report, run_audit
    from .config import AuditConfig

    keys = ("input", "output_dir", "seed", "n_bootstrap", "ci_level", "min_group_size",
            "max_combination", "metrics", "sensitive_attributes", "workers")
    overrides = {k: getattr(args, k) for k in keys}
    config = AuditConfig.load(args.config, overrides)
    log.info("auditing %s", config.input)
    report = run_audit(config)
    paths = emit_report(report, config.output_dir)
    print(f"{len(report.groups)} groups, {len(paths)} files written to {config.output_dir}")
    return EXIT_OK


def _cmd_bench_bias(args) -> int:
    from .bench import run_benchmarks

    overrides = {"seed": args.seed, "sample_sizes": args.sizes, "n_repetitions": args.repetitions}
    paths = run_benchmarks(args.config, args.out, overrides)
    print(f"wrote {', '.join(str(p) for p in paths)}")
    return EXIT_OK


def _cmd_bench_twogroup(args) -> int:
    from .bench import run_twogroup

    if args.n_per_group < 1 or args.bootstrap < 0 or args.workers < 1:
        raise ConfigError("--n-per-group and --workers must be >= 1, --bootstrap >= 0")
    run_twogroup(args.n_per_group, args.seed, args.out, args.bootstrap, args.workers)
    print(f"wrote two-group audit to {args.out}")
    return EXIT_OK


def _cmd_render(args) -> int:
    from .render import render_audit

    out = args.out or str(Path(args.audit_dir) / "plots")
    paths = render_audit(args.audit_dir, out)
    print(f"wrote {len(paths)} images to {out}")
    return EXIT_OK


_COMMANDS = {
    "audit": _cmd_audit,
    "bench-bias": _cmd_bench_bias,
    "bench-twogroup": _cmd_bench_twogroup,
    "render": _cmd_render,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataValidationError as exc:
        print(f"data validation failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - top-level reporting boundary
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
