"""Optional PNG figures written next to the CSV output.

matplotlib is imported lazily with the non-interactive Agg backend so the
rest of the package never depends on a display.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

ORDER_COLORS = {2: "tab:blue", 4: "tab:red", 6: "tab:brown"}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"font.size": 9, "axes.grid": True, "grid.alpha": 0.3, "savefig.dpi": 150})
    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight", metadata={"Software": None})
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def convergence_figure(rows, path) -> Path:
    """Volume and interface errors versus N on log-log axes."""
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
    orders = sorted({r["order"] for r in rows})
    for o in orders:
        sub = [r for r in rows if r["order"] == o]
        N = np.array([r["N"] for r in sub], dtype=float)
        c = ORDER_COLORS.get(o)
        axes[0].loglog(N, [r["volume_error"] for r in sub], "o-", color=c, label=f"order {o}")
        axes[1].loglog(N, [r["interface_error"] for r in sub], "s-", color=c, label=f"order {o}")
    axes[0].set_ylabel("volume error")
    axes[1].set_ylabel("interface error")
    for ax in axes:
        ax.set_xlabel("N")
        ax.legend()
    return _save(fig, path)


def spd_figure(rows, path, columns=("lambda_min",)) -> Path:
    """Minimum eigenvalue per realization, one marker series per column."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    for col in columns:
        vals = [r[col] for r in rows if col in r]
        ax.plot(np.arange(len(vals)), vals, ".", label=col)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("realization")
    ax.set_ylabel("minimum eigenvalue")
    ax.legend()
    return _save(fig, path)


def tau_sweep_figure(rows, path) -> Path:
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
    orders = sorted({r["order"] for r in rows})
    for o in orders:
        sub = [r for r in rows if r["order"] == o]
        ts = [r["tau_scale"] for r in sub]
        c = ORDER_COLORS.get(o)
        axes[0].semilogx(ts, [r["lambda_min"] for r in sub], "o-", color=c, label=f"order {o}")
        axes[1].loglog(ts, [r["lambda_max"] for r in sub], "o-", color=c, label=f"order {o}")
    axes[0].set_ylabel(r"$\lambda_{min}$")
    axes[1].set_ylabel(r"$\lambda_{max}$")
    for ax in axes:
        ax.set_xlabel(r"$\tau_s$")
        ax.legend()
    return _save(fig, path)


def sparsity_figure(A, path, title: str = "") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.spy(A, markersize=0.2, color="k")
    ax.grid(False)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def mesh_figure(mesh, path, samples: int = 17) -> Path:
    """Block outlines; jump faces drawn thick."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(4, 4))
    t = np.linspace(0.0, 1.0, samples)
    jump = {(i.plus_block, i.plus_face) for i in mesh.interfaces if i.jump}
    for b, blk in enumerate(mesh.blocks):
        for k in (1, 2, 3, 4):
            pts = blk.face_points(k, t)
            if (b, k) in jump:
                ax.plot(pts[:, 0], pts[:, 1], color="tab:red", lw=2.0)
            else:
                ax.plot(pts[:, 0], pts[:, 1], color="k", lw=0.6)
    ax.set_aspect("equal")
    ax.grid(False)
    return _save(fig, path)
