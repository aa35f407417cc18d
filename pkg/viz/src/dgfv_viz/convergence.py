"""Log-log convergence plot with per-degree slope annotations."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, load_error_table


def plot_convergence(table_path, out_path):
    """Render error vs h per polynomial degree; returns {degree: slope}.

    Slopes come from a least-squares fit in log-log coordinates and are
    annotated in the legend; degrees with fewer than two levels are rejected.
    """
    data, err_col = load_error_table(table_path)
    degrees = np.unique(data["degree"].astype(int))
    slopes = {}
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    for degree in degrees:
        mask = data["degree"].astype(int) == degree
        h = data["h"][mask]
        err = data[err_col][mask]
        order = np.argsort(h)
        h, err = h[order], err[order]
        if len(h) < 2:
            raise SchemaError(f"degree {degree}: need at least two mesh levels")
        if np.any(err <= 0.0):
            slope = 0.0
        else:
            slope = float(np.polyfit(np.log(h), np.log(err), 1)[0])
        slopes[int(degree)] = slope
        ax.loglog(h, err, "o-", label=f"N={degree} (slope {slope:.2f})")
    ax.set_xlabel("h")
    ax.set_ylabel(err_col)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return slopes


def main(argv=None):
    parser = argparse.ArgumentParser(description="plot a dgfv convergence/difference table")
    parser.add_argument("table", help="CSV with degree, h and an error column")
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)
    try:
        slopes = plot_convergence(args.table, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for degree, slope in sorted(slopes.items()):
        print(f"N={degree}: slope {slope:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
