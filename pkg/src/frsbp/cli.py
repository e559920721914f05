"""Command-line driver: ``fr run | sweep | convergence | verify``.

Exit codes: 0 success, 1 usage error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from .experiment import (
    SWEEPABLE,
    ExperimentConfig,
    UsageError,
    atomic_write,
    coerce,
    convergence,
    convergence_csv,
    format_verify,
    read_config_file,
    records_to_csv,
    run,
    split_values,
    sweep,
    verify,
    verify_csv,
)
from .operators import InadmissibleKappa
from .timeint import DivergenceError

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2

# flag name -> config field
FLAG_FIELDS = {
    "case": "case",
    "basis": "basis",
    "N": "N",
    "K": "K",
    "sigma": "sigma",
    "scheme": "scheme",
    "L": "L",
    "tfinal": "t_final",
    "cfl": "cfl",
    "sample_interval": "sample_interval",
    "out": "out",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_config_flags(p: argparse.ArgumentParser, listy: bool = False) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--case", help="sine | cosine | poly8")
    p.add_argument("--basis", help="lobatto | legendre" + (" (comma list)" if listy else ""))
    p.add_argument("--N", help="polynomial degree" + (" (list or a..b range)" if listy else ""))
    p.add_argument("--K", help="number of elements")
    p.add_argument("--sigma", help="interior flux: 0 central, 1 upwind" + (" (comma list)" if listy else ""))
    p.add_argument("--scheme", help="dg | sd | huynh | kappa=<real> | scaled:<name>/<divisor>")
    p.add_argument("--L", help="domain length (default 2pi)")
    p.add_argument("--tfinal", help="final time")
    p.add_argument("--cfl", help="dt = cfl * dx / (2N + 1)")
    p.add_argument("--sample-interval", dest="sample_interval", help="output cadence")
    p.add_argument("--out", help="output CSV file (run) or directory (sweep)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="single experiment, CSV time series")
    _add_config_flags(p_run)

    p_sweep = sub.add_parser("sweep", help="cross-product of parameter values")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--vary", action="append", default=[], metavar="FIELD=V1,V2",
                         help=f"field among {', '.join(SWEEPABLE)}; repeatable")

    p_conv = sub.add_parser("convergence", help="final error versus N")
    _add_config_flags(p_conv, listy=True)

    p_ver = sub.add_parser("verify", help="check SBP identities over kind x N x scheme")
    p_ver.add_argument("--Nmax", type=int, default=8)
    p_ver.add_argument("--inject-below-bound", action="store_true",
                       help="add kappa = 1.01 * kappa_min per (kind, N); these must fail")
    p_ver.add_argument("--csv", help="also write the report as CSV")
    return parser


def resolve_config(args, list_fields: tuple[str, ...] = ()) -> tuple[ExperimentConfig, dict, dict]:
    """Merge config file and flags. Fields in ``list_fields`` are returned raw."""
    values, vary = {}, {}
    if getattr(args, "config", None):
        values, vary = read_config_file(args.config)
    raw = {}
    for flag, fname in FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is None:
            continue
        if fname in list_fields:
            raw[fname] = v
            continue
        values[fname] = v if fname == "out" else coerce(fname, v)[1]
    cfg = ExperimentConfig(**values)
    return cfg, vary, raw


def _cmd_run(args) -> int:
    cfg, _, _ = resolve_config(args)
    cfg.validate()
    out = cfg.out
    res = run(cfg.replace(out=None))
    text = records_to_csv(res.records)
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg, vary_cfg, _ = resolve_config(args)
    vary = dict(vary_cfg)
    for item in args.vary:
        if "=" not in item:
            raise UsageError(f"--vary expects FIELD=V1,V2, got {item!r}")
        name, vals = item.split("=", 1)
        name = name.strip()
        vary[name] = [coerce(name, v)[1] for v in split_values(vals)]
    if not cfg.out:
        raise UsageError("out: sweep needs an output directory")
    cfg.validate()
    files = sweep(cfg.replace(out=None), list(vary.items()), cfg.out)
    print(f"wrote {len(files)} runs and manifest.csv to {cfg.out}")
    return EXIT_OK


def _cmd_convergence(args) -> int:
    cfg, vary, raw = resolve_config(args, list_fields=("N", "basis", "sigma"))
    Ns = [int(v) for v in split_values(raw["N"])] if "N" in raw else list(vary.get("N", [cfg.N]))
    bases = split_values(raw["basis"]) if "basis" in raw else list(vary.get("basis", ["lobatto", "legendre"]))
    sigmas = [float(v) for v in split_values(raw["sigma"])] if "sigma" in raw else list(vary.get("sigma", [0.0, 1.0]))
    for N in Ns:
        cfg.replace(N=N).validate()
    rows = convergence(cfg.replace(out=None), Ns, bases, sigmas)
    text = convergence_csv(rows)
    if cfg.out:
        atomic_write(cfg.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    entries = verify(range(1, args.Nmax + 1), inject_below_bound=args.inject_below_bound)
    print(format_verify(entries))
    if args.csv:
        atomic_write(args.csv, verify_csv(entries))
    failed = [e for e in entries if not e.report.passed]
    print(f"{len(entries) - len(failed)}/{len(entries)} configurations pass")
    return EXIT_NUMERICAL if failed else EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return {"run": _cmd_run, "sweep": _cmd_sweep, "convergence": _cmd_convergence, "verify": _cmd_verify}[
            args.command
        ](args)
    except UsageError as exc:
        print(f"fr: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InadmissibleKappa, DivergenceError, FloatingPointError) as exc:
        print(f"fr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
