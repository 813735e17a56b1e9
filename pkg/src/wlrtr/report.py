"""Run reports: CSV tables plus PNG figures rendered off-screen."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

__all__ = ["write_csv", "plot_convergence", "plot_band_psnr", "write_report"]


def write_csv(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _save(fig: Figure, path) -> Path:
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=100)
    return Path(path)


def plot_convergence(values: Sequence[float], path, label: str = "objective") -> Path:
    fig = Figure(figsize=(5, 3.5))
    ax = fig.add_subplot()
    ax.plot(range(1, len(values) + 1), values, marker="o")
    ax.set_xlabel("iteration")
    ax.set_ylabel(label)
    if len(values) and min(values) > 0:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_band_psnr(per_band: Sequence[float], path, baseline: Sequence[float] | None = None) -> Path:
    fig = Figure(figsize=(5, 3.5))
    ax = fig.add_subplot()
    ax.plot(range(len(per_band)), per_band, marker="o", label="output")
    if baseline is not None:
        ax.plot(range(len(baseline)), baseline, marker="s", ls="--", label="input")
        ax.legend()
    ax.set_xlabel("band")
    ax.set_ylabel("PSNR (dB)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def write_report(directory, iterations: Sequence[dict], per_band=None, baseline=None) -> list[Path]:
    """Write ``iterations.csv`` and ``convergence.png``; with ``per_band`` also
    ``band_psnr.csv`` and ``band_psnr.png``. Returns the written paths."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    if iterations:
        keys = list(iterations[0])
        out.append(write_csv(d / "iterations.csv", keys, ([r[k] for k in keys] for r in iterations)))
        out.append(plot_convergence([r["energy"] for r in iterations], d / "convergence.png", "energy"))
    if per_band is not None:
        rows = [(b, v) if baseline is None else (b, v, baseline[b]) for b, v in enumerate(per_band)]
        header = ["band", "psnr"] if baseline is None else ["band", "psnr", "input_psnr"]
        out.append(write_csv(d / "band_psnr.csv", header, rows))
        out.append(plot_band_psnr(per_band, d / "band_psnr.png", baseline))
    return out
