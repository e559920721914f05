"""Print asymptotic error, noise and delta0 estimates for a sweep directory.

    python3 scripts/summarize.py results/sine_N4_grid
"""
import csv
import sys
from pathlib import Path

from frsbp.diagnostics import asymptotic_error, column, estimate_delta0, noise_proxy
from frsbp.experiment import read_records


def summarize(directory: Path) -> None:
    with open(directory / "manifest.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    w = max(len(r["file"]) for r in rows) + 2
    print(f"{'file':<{w}} {'asym err':>10} {'last err':>10} {'noise':>9} {'delta0':>8} {'max|theta2|':>11}")
    for row in rows:
        recs = read_records(directory / row["file"])
        theta = abs(column(recs, "theta2")).max()
        print(f"{row['file']:<{w}} {asymptotic_error(recs):10.3e} {recs[-1].err_E_M:10.3e} "
              f"{noise_proxy(recs):9.2e} {estimate_delta0(recs):8.3f} {theta:11.2e}")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    summarize(Path(sys.argv[1]))
