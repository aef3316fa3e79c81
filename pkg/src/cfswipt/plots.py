"""Figure rendering for sweep reports (written next to the delimited output)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_STYLE = {
    "heuristic": dict(color="tab:blue", marker="o", label="Heuristic RIS"),
    "random": dict(color="tab:orange", marker="^", label="Random RIS"),
    "none": dict(color="tab:gray", marker="s", label="No RIS"),
}

_PARAM_LABEL = {
    "L": "Antennas per AP (L)",
    "M": "Number of APs (M)",
}


def _series(rows, design, field):
    pts = [(r.value, getattr(r, field), getattr(r, "he_err" if "he" in field else "se_err"))
           for r in rows
           if r.design == design and not r.infeasible and getattr(r, field) is not None]
    pts.sort(key=lambda p: p[0])
    return pts


def _plot_metric(rows, designs, field, ylabel, param, path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    plotted = False
    for design in designs:
        pts = _series(rows, design, field)
        if not pts:
            continue
        x = [p[0] for p in pts]
        y = [p[1] for p in pts]
        err = [p[2] or 0.0 for p in pts]
        style = _STYLE.get(design, dict(marker="x", label=design))
        ax.errorbar(x, y, yerr=err, capsize=3, lw=1.6, ms=6, **style)
        plotted = True
    if not plotted:
        plt.close(fig)
        return None
    ax.set_xlabel(_PARAM_LABEL.get(param, param))
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_sweep_figures(rows, out_dir, param: str, stem: str = "sweep") -> list:
    """Render SE and HE trend figures; returns the paths actually written."""
    os.makedirs(out_dir, exist_ok=True)
    designs = []
    for r in rows:
        if r.design not in designs:
            designs.append(r.design)
    written = []
    for field, ylabel, suffix in [
        ("se_cf", "Per-IU spectral efficiency [bit/s/Hz]", "se"),
        ("he_bound", "Average harvested energy per EU [W]", "he"),
        ("se_mc", "Per-IU SE, Monte Carlo [bit/s/Hz]", "se_mc"),
        ("he_mc", "Average HE per EU, Monte Carlo [W]", "he_mc"),
    ]:
        path = os.path.join(out_dir, f"{stem}_{suffix}.png")
        if _plot_metric(rows, designs, field, ylabel, param, path):
            written.append(path)
    return written
