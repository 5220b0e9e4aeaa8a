#!/usr/bin/env python3
"""Render the plot-ready CSVs emitted by `hjbi ... --emit-plots` as PNGs.

Usage: render_plots.py <run-output-dir>

Reads plots/value_surface.csv, plots/residual_heatmap.csv and, when present,
plots/path_overlay.csv (or trajectory.csv) from a run directory and writes
value_surface.png / residual_heatmap.png / path.png next to them. Only
1-dimensional state spaces are rendered.
"""

import csv
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def render_surface(plot_dir):
    rows = read_rows(plot_dir / "value_surface.csv")
    if not rows or "y2" in rows[0]:
        return
    slices = {}
    for row in rows:
        slices.setdefault(float(row["s"]), []).append((float(row["y1"]), float(row["V"])))
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for s, pts in sorted(slices.items()):
        pts.sort()
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"s={s:g}")
    ax.set_xlabel("y")
    ax.set_ylabel("V")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(plot_dir / "value_surface.png", dpi=130)
    plt.close(fig)


def render_residuals(plot_dir):
    rows = read_rows(plot_dir / "residual_heatmap.csv")
    if not rows or "y2" in rows[0]:
        return
    s_vals = sorted({float(r["s"]) for r in rows})
    y_vals = sorted({float(r["y1"]) for r in rows})
    grid = [[0.0] * len(y_vals) for _ in s_vals]
    for r in rows:
        grid[s_vals.index(float(r["s"]))][y_vals.index(float(r["y1"]))] = abs(
            float(r["composite"])
        )
    fig, ax = plt.subplots(figsize=(7, 4.5))
    im = ax.imshow(
        grid,
        aspect="auto",
        origin="lower",
        extent=[y_vals[0], y_vals[-1], s_vals[0], s_vals[-1]],
    )
    fig.colorbar(im, ax=ax, label="|composite residual|")
    ax.set_xlabel("y")
    ax.set_ylabel("s")
    fig.tight_layout()
    fig.savefig(plot_dir / "residual_heatmap.png", dpi=130)
    plt.close(fig)


def render_path(run_dir, plot_dir):
    source = plot_dir / "path_overlay.csv"
    if not source.exists():
        source = run_dir / "trajectory.csv"
    if not source.exists():
        return
    rows = read_rows(source)
    if not rows or "y2" in rows[0]:
        return
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot([float(r["s"]) for r in rows], [float(r["y1"]) for r in rows], marker="o")
    for r in rows:
        if r["regime"].endswith("impulse"):
            ax.axvline(float(r["s"]), color="red", alpha=0.3)
    ax.set_xlabel("s")
    ax.set_ylabel("y*")
    fig.tight_layout()
    fig.savefig(plot_dir / "path.png", dpi=130)
    plt.close(fig)


def main():
    if len(sys.argv) != 2:
        print(__doc__)
        return 1
    run_dir = pathlib.Path(sys.argv[1])
    plot_dir = run_dir / "plots"
    if not plot_dir.is_dir():
        print(f"no plots/ directory under {run_dir}; run with --emit-plots first")
        return 1
    if (plot_dir / "value_surface.csv").exists():
        render_surface(plot_dir)
    if (plot_dir / "residual_heatmap.csv").exists():
        render_residuals(plot_dir)
    render_path(run_dir, plot_dir)
    print(f"rendered PNGs under {plot_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
