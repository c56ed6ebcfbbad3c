"""Figure rendering for report data.

Every builder takes plain report rows, writes one PNG next to the
delimited output, and returns the path (or None when there is nothing
to draw).  The Agg backend keeps rendering headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

_FLOOR = 1e-17  # display floor so exactly-zero residuals survive the log axis
_PASS = "#2e7d46"
_FAIL = "#c4392f"


def _finite(value) -> bool:
    return isinstance(value, (int, float)) and np.isfinite(value)


def save_residual_chart(records, path, title: str) -> str | None:
    """Horizontal log-scale residual bars, tolerance ticks, pass/fail color."""
    rows = [r for r in records if _finite(r.get("residual"))]
    if not rows:
        return None
    labels = [f"{r['check']} / {r['name']}" for r in rows]
    values = [max(abs(float(r["residual"])), _FLOOR) for r in rows]
    colors = [_PASS if r.get("passed", True) else _FAIL for r in rows]
    fig, ax = plt.subplots(figsize=(8.5, max(2.8, 0.42 * len(rows) + 1.4)))
    ypos = np.arange(len(rows))
    ax.barh(ypos, values, color=colors, height=0.6)
    for k, row in enumerate(rows):
        tol = row.get("tolerance")
        if _finite(tol) and tol > 0:
            ax.plot([tol], [k], marker="|", markersize=16,
                    markeredgewidth=2, color="black")
    ax.set_yticks(ypos, labels=labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xscale("log")
    ax.set_xlim(left=_FLOOR / 2)
    ax.set_xlabel("residual (bars) and tolerance (ticks)")
    ax.set_title(title)
    ax.grid(axis="x", which="major", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_convergence_chart(curves, path, title: str) -> str | None:
    """Log-log residual-versus-spacing curves with fitted orders.

    ``curves`` maps a scan name to (spacings, residuals, order) where the
    order may be None when no power law was established.
    """
    drawable = {name: data for name, data in curves.items()
                if len(data[0]) and any(v > 0 for v in data[1])}
    if not drawable:
        return None
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for name, (spacings, residuals, order) in sorted(drawable.items()):
        label = name if order is None else f"{name} (order {order:.2f})"
        vals = [max(abs(float(v)), _FLOOR) for v in residuals]
        ax.loglog(spacings, vals, marker="o", label=label)
    ax.set_xlabel("lattice spacing")
    ax.set_ylabel("residual")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def save_roots_chart(root_rows, path, title: str) -> str | None:
    """Root constellations in the complex plane, one marker pair per set."""
    rows = [r for r in root_rows if r.get("u_roots") or r.get("v_roots")]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    cmap = plt.get_cmap("tab10")
    for k, row in enumerate(rows):
        color = cmap(k % 10)
        us = [complex(z[0], z[1]) for z in row.get("u_roots", [])]
        vs = [complex(z[0], z[1]) for z in row.get("v_roots", [])]
        tag = "" if row.get("converged", True) else " (not converged)"
        if us:
            ax.plot([z.real for z in us], [z.imag for z in us],
                    linestyle="", marker="x", markersize=9, color=color,
                    label=f"set {k}: inner{tag}")
        if vs:
            ax.plot([z.real for z in vs], [z.imag for z in vs],
                    linestyle="", marker="o", markersize=6, color=color,
                    fillstyle="none", label=f"set {k}: outer{tag}")
    ax.axhline(0.0, color="gray", linewidth=0.7)
    ax.axvline(0.0, color="gray", linewidth=0.7)
    ax.set_xlabel("real part")
    ax.set_ylabel("imaginary part")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
