"""Metrics CSV and the figures rendered next to it."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from nagi.evolution import GenerationRecord  # noqa: E402

METRICS_HEADER = (
    "generation",
    "best_fitness",
    "mean_fitness",
    "median_fitness",
    "species",
    "mean_nodes",
    "mean_connections",
)

TRACE_HEADER = (
    "step",
    "sample",
    "sensors",
    "label",
    "action",
    "reward",
    "penalty",
    "health",
    "input_spikes",
    "output_spikes",
    "weights",
)

# keep PNG bytes stable between runs
_PNG_META = {"Software": None}


def _fmt(value: float | int) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def write_metrics(history: Sequence[GenerationRecord], path: str | Path) -> Path:
    """One CSV row per generation; floats use ``repr`` so they round-trip exactly."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(METRICS_HEADER)
            for r in history:
                writer.writerow([_fmt(getattr(r, name)) for name in METRICS_HEADER])
    except OSError as exc:
        raise OSError(f"cannot write metrics to {path}: {exc.strerror}") from exc
    return path


def read_metrics(path: str | Path) -> list[dict[str, float]]:
    with Path(path).open(newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def plot_history(history: Sequence[GenerationRecord], path: str | Path, random_baseline: float | None = None) -> Path:
    """Fitness curves on top, species count and genome size below."""
    path = Path(path)
    gens = [r.generation for r in history]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    ax1.plot(gens, [r.best_fitness for r in history], "-o", ms=3, label="best")
    ax1.plot(gens, [r.mean_fitness for r in history], "-", label="mean")
    ax1.plot(gens, [r.median_fitness for r in history], "--", label="median")
    if random_baseline is not None:
        ax1.axhline(random_baseline, color="grey", lw=0.8, ls=":", label="random policy")
    ax1.set_ylabel("lifetime (steps)")
    ax1.legend(frameon=False, fontsize=8)

    ax2.plot(gens, [r.mean_nodes for r in history], "-", label="mean nodes")
    ax2.plot(gens, [r.mean_connections for r in history], "-", label="mean enabled connections")
    ax2.set_ylabel("genome size")
    ax2.set_xlabel("generation")
    twin = ax2.twinx()
    twin.step(gens, [r.species for r in history], where="mid", color="k", lw=0.8, label="species")
    twin.set_ylabel("species")
    ax2.legend(frameon=False, fontsize=8, loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_trace(rows: Sequence[dict], path: str | Path) -> Path:
    """Input/output spike raster, decoded action and synapse magnitudes over a lifetime."""
    path = Path(path)
    steps = [r["step"] for r in rows]
    fig, axes = plt.subplots(3, 1, figsize=(8, 7), sharex=True)
    raster = axes[0]
    n_in = len(rows[0]["input_spikes"]) if rows else 0
    for ch in range(n_in):
        t = [r["step"] for r in rows if r["input_spikes"][ch]]
        raster.vlines(t, ch + 0.6, ch + 1.4, lw=0.5, color="C0")
    n_out = len(rows[0]["output_spikes"]) if rows else 0
    for k in range(n_out):
        t = [r["step"] for r in rows if r["output_spikes"][k]]
        raster.vlines(t, n_in + k + 0.6, n_in + k + 1.4, lw=0.5, color="C3")
    raster.set_ylabel("channel")
    raster.set_title("inputs (blue) and outputs (red)", fontsize=9)

    axes[1].step(steps, [r["action"] for r in rows], where="post", lw=0.8, label="action")
    axes[1].step(steps, [r["label"] for r in rows], where="post", lw=0.8, ls="--", label="label")
    axes[1].set_yticks([0, 1], ["eat", "avoid"])
    axes[1].legend(frameon=False, fontsize=8)

    if rows and rows[0]["weights"]:
        n_syn = len(rows[0]["weights"])
        for s in range(n_syn):
            axes[2].plot(steps, [r["weights"][s] for r in rows], lw=0.7)
    axes[2].set_ylabel("synapse magnitude")
    axes[2].set_xlabel("step (ms)")
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def write_trace(rows: Sequence[dict], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r["step"],
                    r["sample"],
                    ";".join(_fmt(float(x)) for x in r["sensors"]),
                    r["label"],
                    r["action"],
                    int(r["reward"]),
                    int(r["penalty"]),
                    _fmt(r["health"]),
                    "".join("1" if s else "0" for s in r["input_spikes"]),
                    "".join("1" if s else "0" for s in r["output_spikes"]),
                    ";".join(_fmt(w) for w in r["weights"]),
                ]
            )
    return path
