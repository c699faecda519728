"""PNG figures for the CLI's measurement tables (Agg backend, no display needed)."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed metadata keeps PNG bytes stable across runs
_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def plot_digit_sensitivity(rows, path):
    """rows: (N, k, as, stderr)."""
    by_n = defaultdict(list)
    for n, k, v, se in rows:
        by_n[n].append((k, v, se))
    fig, ax = plt.subplots(figsize=(6, 4))
    for n, pts in sorted(by_n.items()):
        ks, vs, ses = zip(*sorted(pts))
        ax.errorbar(ks, vs, yerr=ses, marker="o", ms=3, capsize=2, label=f"N={n}")
        ax.plot(ks, [min(k, 2 * n - k) for k in ks], ls=":", color="gray")
    ax.set_xlabel("digit k (1 = least significant)")
    ax.set_ylabel("average sensitivity of M_k")
    ax.legend()
    return _save(fig, path)


def plot_series(xs, ys, path, xlabel, ylabel, yerr=None, reference=None, loglog=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    if yerr is not None:
        ax.errorbar(xs, ys, yerr=yerr, marker="o", capsize=2)
    else:
        ax.plot(xs, ys, marker="o", ls="", ms=3)
    if reference is not None:
        rx, ry, label = reference
        ax.plot(rx, ry, ls="--", color="gray", label=label)
        ax.legend()
    if loglog:
        ax.set_xscale("log")
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return _save(fig, path)


def plot_fourier(rows, path):
    """rows: (T, combo, estimate, stderr, ...); scatter of |estimate| per T."""
    ts = [r[0] for r in rows]
    vals = [abs(r[2]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(ts, vals, s=8, alpha=0.6)
    ax.set_yscale("symlog", linthresh=1e-3)
    ax.set_xlabel("T")
    ax.set_ylabel("|correlation|")
    return _save(fig, path)


def plot_attention(transcript, path, layer: int = 1, head: int = 1):
    """Attended position per query position for one head."""
    qs = list(range(1, len(transcript.attended) + 1))
    js = [transcript.attended[i - 1][layer - 1][head - 1] for i in qs]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(qs, js, marker="o", ls="", ms=3)
    ax.plot(qs, qs, ls=":", color="gray")
    ax.set_xlabel("query position i")
    ax.set_ylabel(f"attended position (layer {layer}, head {head})")
    return _save(fig, path)
