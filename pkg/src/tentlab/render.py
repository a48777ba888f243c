"""Figures with companion CSV files.

Each renderer writes ``<stem>.png`` and ``<stem>.csv`` into an output
directory and returns both paths.  CSV content depends only on the inputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import disk  # noqa: E402
from .acim import Density  # noqa: E402
from .inverse_limit import sample_threads  # noqa: E402
from .stability import SweepReport  # noqa: E402
from .tent_map import TentMap  # noqa: E402

WHAT = ("acim", "delay", "disk_orbit", "sweep_curves")
_PNG_META = {"Software": None}


def _csv(path: Path, header: str | None, columns, rows) -> Path:
    lines = [f"# {h}" for h in (header or "").splitlines() if h]
    lines.append(",".join(columns))
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")
    return path


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def render_acim(density: Density, t: float, out_dir, stem: str = "acim",
                header: str | None = None) -> tuple[Path, Path]:
    out = Path(out_dir)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.stairs(density.weights, density.edges, fill=True, alpha=0.7)
    ax.set_xlim(-1, 1)
    ax.set_xlabel("x")
    ax.set_ylabel("density")
    ax.set_title(f"invariant density, t = {t:g}")
    png = _save(fig, out / f"{stem}.png")
    csv = out / f"{stem}.csv"
    csv.write_text(density.to_csv(None, header), encoding="utf-8", newline="")
    return png, csv


def render_delay(tent: TentMap, out_dir, n: int = 200_000, burnin: int = 1000, seed: int = 0,
                 stem: str = "delay", header: str | None = None,
                 max_csv_rows: int = 20_000) -> tuple[Path, Path]:
    """Scatter of ``(x_0, x_1)`` over sampled threads."""
    out = Path(out_dir)
    th = sample_threads(tent, n, 2, burnin, seed)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(th[:, 1], th[:, 0], ",", alpha=0.3)
    ax.set_xlim(-1, 1)
    ax.set_ylim(-1, 1)
    ax.set_xlabel("x1")
    ax.set_ylabel("x0")
    ax.set_title(f"thread coordinates, t = {tent.t:g}")
    png = _save(fig, out / f"{stem}.png")
    rows = th[: max_csv_rows]
    csv = _csv(out / f"{stem}.csv", header, ["x0", "x1"], rows)
    return png, csv


def render_disk_orbit(tent: TentMap, y0: float, s0: float, steps: int, out_dir,
                      stem: str = "disk_orbit", header: str | None = None) -> tuple[Path, Path]:
    """Plane trajectory of ``H_t`` iterates starting from ``(y0, s0)``."""
    out = Path(out_dir)
    ys, ss = [float(y0)], [float(s0)]
    for _ in range(steps):
        p = disk.h_step(tent, ys[-1], ss[-1])
        ys.append(float(p.y))
        ss.append(float(p.s))
    ys, ss = np.array(ys), np.array(ss)
    pts = disk.eta(ys, ss)
    fig, ax = plt.subplots(figsize=(5, 5))
    th = np.linspace(0, disk.TWO_PI, 400)
    ax.plot(2 * np.cos(th), 2 * np.sin(th), "k-", lw=0.8)
    ax.plot([-1, 1], [0, 0], "k-", lw=1.5)
    ax.plot(pts.u, pts.v, "o-", ms=3, lw=0.6)
    ax.set_aspect("equal")
    ax.set_title(f"H_t orbit, t = {tent.t:g}")
    png = _save(fig, out / f"{stem}.png")
    rows = np.column_stack([np.arange(ys.size), ys, ss, pts.u, pts.v])
    csv = _csv(out / f"{stem}.csv", header, ["step", "y", "s", "u", "v"], rows)
    return png, csv


def render_sweep_curves(report: SweepReport, out_dir, stem: str = "sweep_curves",
                        header: str | None = None) -> tuple[Path, Path]:
    """Distance against parameter for every distance column of a sweep report."""
    out = Path(out_dir)
    t = report.column("t")
    cols = [c for c in report.columns if c.startswith(("w1", "l1"))]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for c in cols:
        ax.plot(t, report.column(c), "o-", ms=3, label=c)
    ax.set_yscale("symlog", linthresh=1e-4)
    ax.set_xlabel("t")
    ax.set_ylabel("distance to t*")
    ax.legend()
    png = _save(fig, out / f"{stem}.png")
    rows = np.column_stack([t, report.column("dt"), *(report.column(c) for c in cols)])
    csv = _csv(out / f"{stem}.csv", header or report.header(), ["t", "dt", *cols], rows)
    return png, csv
