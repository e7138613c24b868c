"""Figure rendering for CLI reports.  All figures go straight to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DPI = 150


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def bloch_loop_figure(points: np.ndarray, path, title: str = "Bloch-sphere path") -> Path:
    fig = plt.figure(figsize=(6, 6))
    ax = fig.add_subplot(111, projection="3d")
    u = np.linspace(0, 2 * np.pi, 40)
    v = np.linspace(0, np.pi, 20)
    xs = np.outer(np.cos(u), np.sin(v))
    ys = np.outer(np.sin(u), np.sin(v))
    zs = np.outer(np.ones_like(u), np.cos(v))
    ax.plot_wireframe(xs, ys, zs, color="lightgray", alpha=0.4, linewidth=0.4)
    ax.plot(points[:, 0], points[:, 1], points[:, 2], color="tab:red", lw=1.8)
    ax.scatter(*points[0], color="tab:green", s=40, label="start")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_zlabel("z")
    ax.set_title(title)
    ax.legend(loc="upper left")
    ax.set_box_aspect((1, 1, 1))
    return _finish(fig, path)


def populations_figure(times: np.ndarray, states: np.ndarray, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    labels = ["P(up)", "P(dn)"] if states.shape[1] == 2 else [f"P({k})" for k in range(4)]
    for k, label in enumerate(labels):
        ax.plot(times, np.abs(states[:, k]) ** 2, label=label)
    ax.set_xlabel("time (1/energy)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def curve_figure(x, series: dict, path, xlabel: str, ylabel: str,
                 logx: bool = False) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, y in series.items():
        ax.plot(x, y, marker="o", ms=3.5, label=label)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend()
    return _finish(fig, path)


def gate_magnitude_figure(unitary: np.ndarray, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    im = ax.imshow(np.abs(unitary), vmin=0.0, vmax=1.0, cmap="viridis")
    labels = ["dd", "du", "ud", "uu"]
    ax.set_xticks(range(4), labels)
    ax.set_yticks(range(4), labels)
    ax.set_title("|U| (computational order)")
    fig.colorbar(im, ax=ax, shrink=0.85)
    return _finish(fig, path)


def validation_figure(ratios, leakage, discrepancy, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.loglog(ratios, discrepancy, marker="o", label="final-state discrepancy")
    ax.loglog(ratios, leakage, marker="s", label="leakage out of {0,1}")
    ax.set_xlabel("e_j0 / e_ch")
    ax.set_ylabel("error")
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    return _finish(fig, path)
