"""Static SVG figures rendered from the CSV outputs (needs matplotlib)."""

from __future__ import annotations

import csv
import os

from .errors import ConfigError


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ConfigError("output.emit_plots needs matplotlib "
                          "(pip install 'artifact[plots]')") from exc
    return plt


def _columns(path):
    """Numeric columns of a CSV; text columns such as ``status`` are dropped."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for k in rows[0] if rows else ():
        try:
            out[k] = [float(r[k]) for r in rows]
        except ValueError:
            continue
    return out


def plot_profiles(csv_paths, out_path, labels=None, column="r"):
    """Overlay ``column`` against ``R`` for a set of profile CSVs."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    for i, path in enumerate(csv_paths):
        cols = _columns(path)
        label = labels[i] if labels else os.path.basename(path)
        ax.plot(cols["R"], cols[column], label=label)
    ax.set_xlabel("R")
    ax.set_ylabel(column)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path


def plot_table(csv_path, x, y, out_path, logx=False):
    plt = _pyplot()
    cols = _columns(csv_path)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(cols[x], cols[y], "o-")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return out_path
