"""Run every shipped experiment config and write the CSVs under results/.

    python3 scripts/reproduce_figures.py                 # all configs
    python3 scripts/reproduce_figures.py sine_N4_grid    # selected ones
    python3 scripts/reproduce_figures.py --jobs 4

Configs with a ``convergence`` in their name go through ``fr convergence``,
the rest through ``fr sweep``. Runs are independent, so --jobs spreads whole
configs over processes.
"""
import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from frsbp.cli import main as fr

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"


def run_config(path: Path) -> tuple[str, int, float]:
    cmd = "convergence" if "convergence" in path.stem else "sweep"
    t0 = time.perf_counter()
    rc = fr([cmd, "--config", str(path)])
    return path.stem, rc, time.perf_counter() - t0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="config stems; default all")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args(argv)

    paths = sorted(CONFIGS.glob("*.cfg"))
    if args.names:
        known = {p.stem: p for p in paths}
        missing = [n for n in args.names if n not in known]
        if missing:
            ap.error(f"unknown config(s): {', '.join(missing)}")
        paths = [known[n] for n in args.names]

    # relative out paths in the configs are resolved from the repo root
    os.chdir(ROOT)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(run_config, paths))
    else:
        results = [run_config(p) for p in paths]
    bad = 0
    for name, rc, secs in results:
        print(f"{name:<32} exit {rc}  {secs:7.1f} s")
        bad += rc != 0
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
