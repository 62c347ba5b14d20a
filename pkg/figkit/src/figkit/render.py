"""Deterministic rendering of figure recipes.

Same CSV + recipe always yield the same pixel dimensions and the same
data extents; the render summary reports both so callers can assert it.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .recipes import EmptyData, FigureRecipe, read_table

FIGSIZE = (6.4, 4.8)
DPI = 125

_ANALYTIC = {
    # cascade visibility estimate against the rate ratio
    "cascade_visibility": lambda x: x / (1.0 + x),
}


def _apply_labels(ax, recipe):
    labels = recipe.labels
    ax.set_xlabel(labels.get("x", recipe.x))
    if "y" in labels:
        ax.set_ylabel(labels["y"])
    if "title" in labels:
        ax.set_title(labels["title"])


def _draw_bands(ax, recipe):
    for band in recipe.reference_bands:
        ax.axhspan(band.value - band.halfwidth, band.value + band.halfwidth,
                   alpha=0.25, hatch="///", label=band.label, linewidth=0)


def _render_line(ax, recipe, table):
    order = np.argsort(table[recipe.x], kind="stable")
    x = table[recipe.x][order]
    for col in recipe.series:
        ax.plot(x, table[col][order], marker="o", markersize=3, label=col)
    if recipe.analytic:
        fn = _ANALYTIC[recipe.analytic]
        xs = np.linspace(x.min(), x.max(), 256)
        ax.plot(xs, fn(xs), "k--", linewidth=1, label=recipe.analytic)
        ax.plot(x, fn(x), "kx")
    _draw_bands(ax, recipe)
    ax.legend(fontsize=8)
    return (float(x.min()), float(x.max()))


def _pivot(table, recipe):
    xs = np.unique(table[recipe.x])
    ys = np.unique(table[recipe.y])
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = np.searchsorted(xs, table[recipe.x])
    yi = np.searchsorted(ys, table[recipe.y])
    grid[yi, xi] = table[recipe.value]
    return xs, ys, grid


def _render_heatmap(ax, fig, recipe, table):
    xs, ys, grid = _pivot(table, recipe)
    if len(xs) < 2 or len(ys) < 2:
        raise EmptyData("heatmap needs at least a 2x2 grid of samples")
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest")
    fig.colorbar(mesh, ax=ax, label=recipe.labels.get("value", recipe.value))
    if recipe.kind == "heatmap+ridge" and recipe.ridge_json:
        fit = json.loads(Path(recipe.ridge_json).read_text())
        alpha, beta = fit["alpha_uev"], fit["beta_uev"]
        line_y = alpha * xs + beta
        keep = (line_y >= ys.min()) & (line_y <= ys.max())
        ax.plot(xs[keep], line_y[keep], "w:", linewidth=2, label="ridge fit")
        pts = fit.get("points", [])
        if pts:
            ax.plot([p["f_p"] for p in pts], [p["hbar_g"] for p in pts], "w.", markersize=4)
        ax.legend(fontsize=8, loc="upper left")
    ax.set_ylabel(recipe.labels.get("y", recipe.y))
    return (float(xs.min()), float(xs.max())), (float(ys.min()), float(ys.max()))


def _render_cross_sections(ax, recipe, table):
    ys = np.unique(table[recipe.y])
    x_min, x_max = np.inf, -np.inf
    for target in recipe.sections_at:
        nearest = ys[np.argmin(np.abs(ys - target))]
        sel = table[recipe.y] == nearest
        order = np.argsort(table[recipe.x][sel], kind="stable")
        x = table[recipe.x][sel][order]
        x_min, x_max = min(x_min, x.min()), max(x_max, x.max())
        for col in recipe.series:
            ax.plot(x, table[col][sel][order], marker=".",
                    label=f"{col} @ {recipe.y}={nearest:g}")
    _draw_bands(ax, recipe)
    ax.legend(fontsize=7)
    return (float(x_min), float(x_max))


def render(recipe: FigureRecipe, out_dir) -> dict:
    """Render one recipe; returns {path, width_px, height_px, x_extent, ...}."""
    table = read_table(recipe)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
    try:
        y_extent = None
        if recipe.kind == "line":
            x_extent = _render_line(ax, recipe, table)
        elif recipe.kind in ("heatmap", "heatmap+ridge"):
            x_extent, y_extent = _render_heatmap(ax, fig, recipe, table)
        elif recipe.kind == "cross-sections":
            x_extent = _render_cross_sections(ax, recipe, table)
        else:  # pragma: no cover - load_recipe already validates
            raise ValueError(f"unknown kind {recipe.kind!r}")
        _apply_labels(ax, recipe)
        path = out_dir / recipe.out_name
        fig.savefig(path, metadata={"Software": None})
    finally:
        plt.close(fig)
    width = int(round(FIGSIZE[0] * DPI))
    height = int(round(FIGSIZE[1] * DPI))
    summary = {
        "path": str(path),
        "width_px": width,
        "height_px": height,
        "x_extent": x_extent,
        "y_extent": y_extent,
        "rows": int(len(table[recipe.x])),
    }
    return summary
