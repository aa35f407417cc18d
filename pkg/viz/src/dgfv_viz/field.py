"""Side-by-side density and blending-coefficient heatmaps of a field dump."""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import SchemaError, load_field


def _panel(ax, x, y, values, title, cmap):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-14:
        # Collapsed range (constant field): pad so the colorbar stays valid.
        pad = max(1e-12, abs(hi) * 1e-12)
        lo, hi = lo - pad, hi + pad
    tri = ax.tripcolor(x, y, values, shading="gouraud", cmap=cmap, vmin=lo, vmax=hi)
    ax.set_title(title)
    ax.set_aspect("equal")
    return tri


def plot_field(field_path, out_path):
    """Density and alpha maps of one snapshot; nodes are triangulated."""
    data = load_field(field_path)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    t0 = _panel(axes[0], data["x"], data["y"], data["rho"], "density", "viridis")
    fig.colorbar(t0, ax=axes[0], shrink=0.85)
    t1 = _panel(axes[1], data["x"], data["y"], data["alpha"], "blending coefficient", "inferno")
    fig.colorbar(t1, ax=axes[1], shrink=0.85)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def main(argv=None):
    parser = argparse.ArgumentParser(description="plot a dgfv field snapshot")
    parser.add_argument("field", help="field CSV (x, y, rho, vx, vy, p, alpha)")
    parser.add_argument("--out", required=True, help="output PNG path")
    args = parser.parse_args(argv)
    try:
        plot_field(args.field, args.out)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
