"""Figures written next to the CSV output (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, path: Path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)


def plot_profiles(curves, path, title: str = "", xlabel: str = "x", ylabel: str = "u"):
    """Overlay of (label, x, u) curves on the half period."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, x, u in curves:
        ax.plot(x, u, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, Path(path))


def plot_max_history(series, path, title: str = ""):
    """max_u against t on a log axis, one line per (label, t, max_u)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, t, m in series:
        ax.semilogy(t, m, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("max u")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    _save(fig, Path(path))


def plot_blowup_times(alphas, T_num, path, title: str = ""):
    """T_num against alpha for the runs that blew up."""
    a = np.asarray(alphas, dtype=float)
    T = np.asarray([np.nan if t is None else t for t in T_num], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(a, T, "o-")
    ax.set_xlabel("alpha")
    ax.set_ylabel("T_num")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    _save(fig, Path(path))


def plot_error_table(rows, path, title: str = ""):
    """Absolute error against kappa, one line per alpha; rows are (kappa, alpha, err)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    alphas = sorted({r[1] for r in rows})
    for al in alphas:
        pts = sorted((k, max(e, 1e-18)) for k, a, e in rows if a == al)
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"alpha={al:g}")
    ax.set_xlabel("kappa")
    ax.set_ylabel("|error|")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7, ncol=2)
    ax.grid(alpha=0.3, which="both")
    _save(fig, Path(path))
