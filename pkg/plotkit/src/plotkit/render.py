"""Render experiment CSVs into the three figure types.

Plots never recompute statistics: every drawn vertex comes straight from the
CSV. Output is deterministic SVG (pinned hash salt, no date metadata) so
regenerating a figure from the same inputs is byte-stable.
"""

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import BY_KIND, IMAGE_TARGETS, SchemaError, load_rows

# styling per mode, matching the reference figures: polarimetric-with-DP in
# solid blue, its H-only counterpart red dashed, target-path-only in green,
# H-only target-path-only in magenta dotted
MODE_STYLE = {
    "DP-POL": {"color": "tab:blue", "linestyle": "-"},
    "DP-NOPOL": {"color": "tab:red", "linestyle": "--"},
    "POL": {"color": "tab:green", "linestyle": "-"},
    "NOPOL": {"color": "magenta", "linestyle": ":"},
}
_FALLBACK_STYLE = {"color": "0.3", "linestyle": "-."}

DIPOLE_SEGMENT_M = 30.0


@dataclass
class FigureSpec:
    """What to render: inputs, figure kind, output path, optional cosmetics."""

    kind: str
    csv_path: str
    out_path: str
    targets_csv: str | None = None  # stat_image overlay sidecar
    title: str | None = None
    xlim: tuple | None = None
    ylim: tuple | None = None

    def __post_init__(self):
        if self.kind not in BY_KIND:
            raise SchemaError(
                f"unknown figure kind {self.kind!r} (choose from {sorted(BY_KIND)})"
            )


def _deterministic_rc():
    plt.rcParams["svg.hashsalt"] = "plotkit"
    plt.rcParams["svg.fonttype"] = "path"


def _by_mode(rows):
    modes = []
    for row in rows:
        if row["mode"] not in modes:
            modes.append(row["mode"])
    return {m: [r for r in rows if r["mode"] == m] for m in modes}


def _curve_figure(rows, y_col, ylabel, band=False):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for mode, mode_rows in _by_mode(rows).items():
        mode_rows = sorted(mode_rows, key=lambda r: float(r["snr_db"]))
        x = np.array([float(r["snr_db"]) for r in mode_rows])
        y = np.array([float(r[y_col]) for r in mode_rows])
        style = MODE_STYLE.get(mode, _FALLBACK_STYLE)
        ax.plot(x, y, label=mode, marker="o", markersize=3.5, **style)
        if band:
            lo = np.array([float(r["ci_lo"]) for r in mode_rows])
            hi = np.array([float(r["ci_hi"]) for r in mode_rows])
            ax.fill_between(x, lo, hi, color=style["color"], alpha=0.18, linewidth=0)
    ax.set_xlabel("average target-path SNR (dB)")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend()
    return fig, ax


def render_pd_curve(spec):
    rows = load_rows(spec.csv_path, BY_KIND["pd_curve"])
    fig, ax = _curve_figure(rows, "pd", "probability of detection", band=True)
    ax.set_ylim(-0.02, 1.05)
    return fig, ax


def render_dphi_curve(spec):
    rows = load_rows(spec.csv_path, BY_KIND["dphi_curve"])
    fig, ax = _curve_figure(rows, "dphi_rad", "mean dipole angle error (rad)")
    ax.set_ylim(0.0, np.pi / 2 * 1.1)
    ax.axhline(np.pi / 2, color="0.6", linewidth=0.8, linestyle="--")
    return fig, ax


def render_stat_image(spec):
    rows = load_rows(spec.csv_path, BY_KIND["stat_image"])
    nx = max(int(r["ix"]) for r in rows) + 1
    ny = max(int(r["iy"]) for r in rows) + 1
    if len(rows) != nx * ny:
        raise SchemaError(f"stat_image grid incomplete: {len(rows)} rows for {nx}x{ny}")
    lam = np.empty((ny, nx))
    xs = np.empty(nx)
    ys = np.empty(ny)
    for r in rows:
        ix, iy = int(r["ix"]), int(r["iy"])
        lam[iy, ix] = float(r["lambda"])
        xs[ix] = float(r["x_m"])
        ys[iy] = float(r["y_m"])
    fig, ax = plt.subplots(figsize=(6.0, 5.2))
    mesh = ax.pcolormesh(xs, ys, lam, shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="test statistic")
    if spec.targets_csv is not None:
        for t in load_rows(spec.targets_csv, IMAGE_TARGETS):
            x, y = float(t["x_m"]), float(t["y_m"])
            ax.plot([x], [y], marker="o", markerfacecolor="none",
                    markeredgecolor="white", markersize=12, linestyle="none")
            for prefix, style in (
                ("e_true", {"color": "tab:blue", "linestyle": "-"}),
                ("e_est", {"color": "yellow", "linestyle": "--"}),
            ):
                ex = float(t[prefix + "_x"])
                ey = float(t[prefix + "_y"])
                norm = np.hypot(ex, ey)
                if norm == 0.0:
                    continue  # dipole points straight up; no ground-plane trace
                ux, uy = ex / norm, ey / norm
                half = DIPOLE_SEGMENT_M / 2.0
                ax.plot(
                    [x - half * ux, x + half * ux],
                    [y - half * uy, y + half * uy],
                    linewidth=2.0,
                    **style,
                )
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    return fig, ax


_RENDERERS = {
    "pd_curve": render_pd_curve,
    "dphi_curve": render_dphi_curve,
    "stat_image": render_stat_image,
}


def render_figure(spec):
    """Build the matplotlib figure for a spec (no file output)."""
    _deterministic_rc()
    fig, ax = _RENDERERS[spec.kind](spec)
    if spec.title:
        ax.set_title(spec.title)
    if spec.xlim:
        ax.set_xlim(*spec.xlim)
    if spec.ylim:
        ax.set_ylim(*spec.ylim)
    return fig


def render(spec):
    """Render to spec.out_path (SVG for byte-stable output). Returns the path."""
    fig = render_figure(spec)
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
