"""Experiment configuration, single runs, sweeps, convergence studies and
operator verification. The command-line front end lives in :mod:`frsbp.cli`."""
from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import math
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .basis import BasisKind, NodalBasis
from .diagnostics import CSV_FIELDS, DiagnosticsRecord, DiagnosticsTracker
from .operators import SbpOperators, SbpReport, kappa_lower_bound, parse_scheme, verify_sbp
from .scheme import FluxConfig, Mesh, TestCase, init_state
from .timeint import TimeConfig, integrate


class UsageError(ValueError):
    """Bad configuration value or flag combination."""


@dataclass
class ExperimentConfig:
    case: str = "sine"
    basis: str = "lobatto"
    N: int = 4
    K: int = 50
    sigma: float = 1.0
    scheme: str = "dg"
    L: float = 2 * math.pi
    t_final: float = 20.0
    cfl: float = 0.025
    sample_interval: float = 0.05
    out: Optional[str] = None

    def validate(self) -> "ExperimentConfig":
        try:
            TestCase.from_name(self.case)
        except ValueError:
            raise UsageError(f"case: unknown test case {self.case!r}") from None
        try:
            BasisKind.parse(self.basis)
        except ValueError:
            raise UsageError(f"basis: unknown basis {self.basis!r}") from None
        if self.N < 1:
            raise UsageError(f"N: must be >= 1, got {self.N}")
        if self.K < 1:
            raise UsageError(f"K: must be >= 1, got {self.K}")
        if not 0.0 <= self.sigma <= 1.0:
            raise UsageError(f"sigma: must lie in [0, 1], got {self.sigma}")
        if not self.L > 0:
            raise UsageError(f"L: must be positive, got {self.L}")
        if not self.t_final > 0:
            raise UsageError(f"t_final: must be positive, got {self.t_final}")
        if not self.cfl > 0:
            raise UsageError(f"cfl: must be positive, got {self.cfl}")
        if not self.sample_interval > 0:
            raise UsageError(f"sample_interval: must be positive, got {self.sample_interval}")
        try:
            self.kappa
        except ValueError as exc:
            raise UsageError(f"scheme: {exc}") from None
        return self

    @property
    def kappa(self) -> float:
        return parse_scheme(self.scheme, self.N)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
_CASTS = {"N": int, "K": int, "sigma": float, "L": float, "t_final": float, "cfl": float, "sample_interval": float}
# config-file spellings that differ from the attribute names
_KEY_ALIASES = {"tfinal": "t_final", "sample-interval": "sample_interval", "n": "N", "k": "K", "l": "L"}


def coerce(key: str, value: str):
    key = _KEY_ALIASES.get(key, key)
    if key not in FIELD_TYPES:
        raise UsageError(f"unknown config key {key!r}")
    cast = _CASTS.get(key, str)
    try:
        if key == "L" and value.strip().lower() in ("2pi", "2*pi"):
            return key, 2 * math.pi
        return key, cast(value.strip())
    except ValueError:
        raise UsageError(f"{key}: cannot parse {value!r}") from None


def read_config_file(path) -> tuple[dict, dict]:
    """Parse ``key=value`` lines; ``#`` starts a comment.

    Keys ``vary.<field>`` hold comma-separated sweep values and are returned
    separately.
    """
    values, vary = {}, {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("vary."):
            fname = _KEY_ALIASES.get(key[5:], key[5:])
            vary[fname] = [coerce(fname, v)[1] for v in split_values(val)]
        else:
            k, v = coerce(key, val)
            values[k] = v
    return values, vary


def split_values(text: str) -> list[str]:
    """Split a comma list; ``a..b`` expands integer ranges."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = re.fullmatch(r"(-?\d+)\.\.(-?\d+)", part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            out.extend(str(i) for i in range(lo, hi + 1))
        else:
            out.append(part)
    return out


@dataclass
class RunResult:
    config: ExperimentConfig
    kappa: float
    records: list[DiagnosticsRecord]
    identity_residual: float

    def column(self, name: str) -> np.ndarray:
        from .diagnostics import column

        return column(self.records, name)


def build_run(config: ExperimentConfig):
    config.validate()
    basis = NodalBasis.create(config.basis, config.N)
    ops = SbpOperators.build(basis, config.kappa)
    mesh = Mesh(config.K, config.L)
    case = TestCase.from_name(config.case)
    flux = FluxConfig(config.sigma)
    timecfg = TimeConfig(config.t_final, cfl=config.cfl, sample_interval=config.sample_interval)
    return basis, ops, mesh, case, flux, timecfg


def run(config: ExperimentConfig, dt_override: Optional[float] = None) -> RunResult:
    """Integrate one configuration and collect a record per sample.

    Writes the CSV to ``config.out`` when set.
    """
    basis, ops, mesh, case, flux, timecfg = build_run(config)
    if dt_override is not None:
        timecfg = dataclasses.replace(timecfg, dt_override=dt_override)
    tracker = DiagnosticsTracker(ops, flux, case, mesh)
    integrate(init_state(case, mesh, basis), ops, flux, case, timecfg, tracker)
    result = RunResult(config, ops.kappa, tracker.records, tracker.identity_residual)
    if config.out:
        write_records(config.out, tracker.records)
    return result


def records_to_csv(records: Iterable[DiagnosticsRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records(path, records) -> None:
    atomic_write(path, records_to_csv(records))


def read_records(path) -> list[DiagnosticsRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            vals = {k: (None if row[k] == "" else float(row[k])) for k in CSV_FIELDS}
            out.append(DiagnosticsRecord(**vals))
    return out


SWEEPABLE = ("basis", "N", "K", "sigma", "scheme")


def _slug(value) -> str:
    return re.sub(r"[^A-Za-z0-9.]+", "-", str(value)).strip("-")


def sweep(base: ExperimentConfig, vary: Sequence[tuple[str, Sequence]], out_dir) -> list[tuple[Path, ExperimentConfig]]:
    """Run the cross product of ``vary`` and write one CSV per combination
    plus ``manifest.csv`` mapping file names to parameters."""
    if not vary:
        raise UsageError("sweep: nothing to vary")
    for name, values in vary:
        if name not in SWEEPABLE:
            raise UsageError(f"sweep: field {name!r} is not sweepable (choose from {', '.join(SWEEPABLE)})")
        if len(values) == 0:
            raise UsageError(f"sweep: empty value list for {name!r}")
    names = [n for n, _ in vary]
    out_dir = Path(out_dir)
    done = []
    manifest = io.StringIO()
    mw = csv.writer(manifest, lineterminator="\n")
    mw.writerow(["file", "case", "basis", "N", "K", "sigma", "scheme", "kappa", "t_final", "cfl"])
    for i, combo in enumerate(itertools.product(*(v for _, v in vary))):
        cfg = base.replace(**dict(zip(names, combo)))
        slug = "_".join(f"{n}{_slug(v)}" for n, v in zip(names, combo))
        fname = f"run{i:03d}_{slug}.csv"
        cfg = cfg.replace(out=str(out_dir / fname))
        res = run(cfg)
        mw.writerow([fname, cfg.case, cfg.basis, cfg.N, cfg.K, cfg.sigma, cfg.scheme, repr(res.kappa), cfg.t_final, cfg.cfl])
        done.append((out_dir / fname, cfg))
    atomic_write(out_dir / "manifest.csv", manifest.getvalue())
    return done


@dataclass
class ConvergenceRow:
    N: int
    basis: str
    sigma: float
    final_err_E_M: float


def convergence(
    base: ExperimentConfig,
    Ns: Sequence[int],
    bases: Sequence[str] = ("lobatto", "legendre"),
    sigmas: Sequence[float] = (0.0, 1.0),
) -> list[ConvergenceRow]:
    """Last-sample err_E_M as a function of N for each (basis, sigma)."""
    if len(Ns) == 0:
        raise UsageError("convergence: empty N range")
    rows = []
    for basis in bases:
        for sigma in sigmas:
            for N in Ns:
                res = run(base.replace(basis=basis, sigma=float(sigma), N=int(N), out=None))
                rows.append(ConvergenceRow(int(N), BasisKind.parse(basis).value, float(sigma), float(res.records[-1].err_E_M)))
    return rows


def convergence_csv(rows: Sequence[ConvergenceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "basis", "sigma", "final_err_E_M"])
    for r in rows:
        w.writerow([r.N, r.basis, f"{r.sigma:g}", f"{r.final_err_E_M:.16e}"])
    return buf.getvalue()


@dataclass
class VerifyEntry:
    label: str
    report: SbpReport


def verify(
    Ns: Iterable[int] = range(1, 9),
    schemes: Sequence[str] = ("dg", "sd", "huynh"),
    inject_below_bound: bool = False,
) -> list[VerifyEntry]:
    """Operator identity reports over basis kind x N x scheme.

    ``inject_below_bound`` adds one configuration per (kind, N) with kappa
    at 1.01 times the lower bound, which must fail definiteness.
    """
    out = []
    for kind in BasisKind:
        for N in Ns:
            basis = NodalBasis.create(kind, N)
            for s in schemes:
                k = parse_scheme(s, N)
                out.append(VerifyEntry(s, verify_sbp(SbpOperators.build(basis, k))))
            if inject_below_bound:
                k = 1.01 * kappa_lower_bound(kind, N)
                out.append(VerifyEntry("1.01*kappa_min", verify_sbp(SbpOperators.build(basis, k, check=False))))
    return out


def format_verify(entries: Sequence[VerifyEntry]) -> str:
    head = f"{'basis':<9} {'N':>2} {'scheme':<15} {'kappa':>13} {'sbp':>9} {'ext_sbp':>9} {'KD':>9} {'quad':>9} {'M+K>0':>6}  status"
    lines = [head]
    for e in entries:
        r = e.report
        lines.append(
            f"{r.kind.value:<9} {r.N:>2} {e.label:<15} {r.kappa:>13.6e} {r.sbp:>9.2e} {r.extended_sbp:>9.2e} "
            f"{r.ktilde_D:>9.2e} {r.quadrature:>9.2e} {str(r.positive_definite):>6}  {'pass' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines)


def verify_csv(entries: Sequence[VerifyEntry]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["basis", "N", "scheme", "kappa", "sbp", "extended_sbp", "ktilde_D", "quadrature", "positive_definite", "passed"])
    for e in entries:
        r = e.report
        w.writerow([r.kind.value, r.N, e.label, repr(r.kappa), f"{r.sbp:.3e}", f"{r.extended_sbp:.3e}",
                    f"{r.ktilde_D:.3e}", f"{r.quadrature:.3e}", int(r.positive_definite), int(r.passed)])
    return buf.getvalue()
