"""Phase-portrait and sweep figures written next to the CSV/JSON outputs."""

from __future__ import annotations

import io
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .planar_affine import SublevelSet  # noqa: E402

ELLIPSE_POINTS = 128
MARGIN = 0.10

_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "dwellcert",
    "font.size": 9,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.0,
}


def _fit_limits(ax, points: np.ndarray) -> None:
    lo = points.min(axis=0)
    hi = points.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    ax.set_xlim(lo[0] - MARGIN * span[0], hi[0] + MARGIN * span[0])
    ax.set_ylim(lo[1] - MARGIN * span[1], hi[1] + MARGIN * span[1])


def _save(fig, path) -> None:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)


def _closed(poly: np.ndarray) -> np.ndarray:
    return np.vstack([poly, poly[:1]])


def phase_portrait(path, traj, level_sets, v_th=None, title=None) -> None:
    """Draw the trajectory with level-set ellipses and an optional threshold line.

    ``level_sets`` is a sequence of ``(label, SublevelSet, style)`` where style is
    ``"core"`` (the level-``k`` sets, filled dark) or ``"tube"`` (enclosing levels, filled light).
    """
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 4.2))
        pts = [traj.x[:, :2]]
        for label, S, style in sorted(level_sets, key=lambda item: item[2] != "tube"):
            poly = _closed(S.boundary(ELLIPSE_POINTS))
            pts.append(poly)
            face = "0.88" if style == "tube" else "0.6"
            ax.fill(poly[:, 0], poly[:, 1], facecolor=face, edgecolor="0.3", linewidth=0.6, label=label)
        ax.plot(traj.x[:, 0], traj.x[:, 1], color="C0", linewidth=0.8, label="trajectory")
        allpts = np.concatenate(pts)
        if v_th is not None:
            ax.axvline(v_th, color="C3", linestyle="--", linewidth=0.9, label=r"$v = v_{th}$")
            allpts = np.vstack([allpts, [[v_th, allpts[0, 1]]]])
        _fit_limits(ax, allpts)
        ax.set_xlabel(r"$x_1$ ($v$)")
        ax.set_ylabel(r"$x_2$ ($h$)")
        if title:
            ax.set_title(title)
        ax.legend(loc="best", fontsize=7, frameon=False)
        fig.tight_layout()
        _save(fig, path)


def neuron_level_sets(lyap_off, lyap_on, k: float, k_bar: float):
    return [
        ("N_OFF^k", SublevelSet(lyap_off, k), "core"),
        ("N_ON^k", SublevelSet(lyap_on, k), "core"),
        ("N_ON^kbar", SublevelSet(lyap_on, k_bar), "tube"),
    ]


def sweep_figure(path, rows) -> None:
    """Worst switch-instant ``V / k`` against ``T`` per level ``k``, with certified dwell times marked."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for i, k in enumerate(sorted({r["k"] for r in rows})):
            sub = sorted((r for r in rows if r["k"] == k), key=lambda r: r["T"])
            T = [r["T"] for r in sub]
            ax.plot(T, [r["switch_V_max"] / k for r in sub], marker="o", markersize=3,
                    color=f"C{i}", label=f"k = {k:g}")
            ax.axvline(sub[0]["tau_d"], color=f"C{i}", linestyle=":", linewidth=0.8)
        ax.axhline(1.0, color="0.4", linewidth=0.6)
        ax.set_xlabel(r"$T_I = T_0$")
        ax.set_ylabel("max switch-instant V / k")
        ax.legend(fontsize=7, frameon=False)
        fig.tight_layout()
        _save(fig, path)
