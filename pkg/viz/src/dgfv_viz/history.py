"""Mean blending coefficient and cumulative step count over time, per run."""

from __future__ import annotations

import argparse
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .io import SchemaError, load_history


def plot_history(history_paths, out_path, labels=None):
    """Overlay one curve per run on shared axes (alpha left, steps right)."""
    if labels is None:
        labels = [os.path.splitext(os.path.basename(p))[0] for p in history_paths]
    if len(labels) != len(history_paths):
        raise SchemaError("need one label per history file")
    fig, (ax_alpha, ax_steps) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    for path, label in zip(history_paths, labels):
        data = load_history(path)
        ax_alpha.plot(data["t"], data["mean_alpha"], label=label)
        ax_steps.plot(data["t"], data["step"], label=label)
    ax_alpha.set_xlabel("t")
    ax_alpha.set_ylabel("mean blending coefficient")
    ax_alpha.legend(fontsize=8)
    ax_alpha.grid(alpha=0.3)
    ax_steps.set_xlabel("t")
    ax_steps.set_ylabel("time steps taken")
    ax_steps.legend(fontsize=8)
    ax_steps.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def main(argv=None):
    parser = argparse.ArgumentParser(description="plot dgfv step histories")
    parser.add_argument("histories", nargs="+", help="history CSV(s) (t, mean_alpha, dt, step)")
    parser.add_argument("--out", required=True, help="output PNG path")
    parser.add_argument("--label", action="append", help="legend label per input, in order")
    args = parser.parse_args(argv)
    try:
        plot_history(args.histories, args.out, args.label)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
