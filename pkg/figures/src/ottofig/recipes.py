"""Figure recipes: which sweep columns each standard plot consumes and how
they are laid out.

Heatmap recipes take one or two CSVs produced on a (coordinate, t1) grid;
line recipes take a grid whose first axis indexes the curve family.  The
dipole-dipole panels fetch their curves through the ottosim CLI, never by
computing physics here.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import SweepTable, fetch_coefficients, load_table

log = logging.getLogger(__name__)

HEAT_LABELS = {
    "Q_h": "heat absorbed",
    "Q_c": "heat rejected",
    "W_out": "output work",
    "eta": "efficiency",
    "power": "power output",
    "F12": "heating-stroke fidelity",
    "F23": "expansion-stroke fidelity",
    "F41": "compression-stroke fidelity",
}


@dataclass(frozen=True)
class Recipe:
    figure_id: str
    kind: str  # heatmap | lines | overlay
    panels: tuple[str, ...]
    x: str  # t1 | tau | xi
    coordinate: str  # xi | theta: heatmap y axis, or the line-family axis
    ddi_panel: bool = False
    zero_contour_on: str | None = None

    @property
    def required_columns(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.panels + (self.x, self.coordinate)))


RECIPES: dict[str, Recipe] = {
    "fig2": Recipe("fig2", "heatmap", ("Q_h", "W_out", "eta"), "t1", "xi",
                   ddi_panel=True, zero_contour_on="W_out"),
    "fig10": Recipe("fig10", "heatmap", ("Q_h", "W_out", "eta"), "t1", "xi",
                    ddi_panel=True, zero_contour_on="W_out"),
    "fig8": Recipe("fig8", "heatmap", ("Q_h", "W_out", "eta"), "t1", "theta",
                   ddi_panel=True, zero_contour_on="W_out"),
    "fig3": Recipe("fig3", "lines", ("Q_h", "Q_c", "W_out", "eta"), "t1", "xi"),
    "fig11": Recipe("fig11", "lines", ("Q_h", "Q_c", "W_out", "eta"), "t1", "xi"),
    "fig100": Recipe("fig100", "lines", ("F12",), "t1", "xi"),
    "fig4": Recipe("fig4", "lines", ("W_out", "eta"), "tau", "xi"),
    "fig5": Recipe("fig5", "lines", ("F23", "F41", "W_out", "eta"), "tau", "xi"),
    "fig6": Recipe("fig6", "lines", ("power",), "tau", "xi"),
    "fig12": Recipe("fig12", "lines", ("F23", "F41", "W_out", "eta"), "t1", "xi"),
    "fig9": Recipe("fig9", "overlay", ("eta",), "xi", "xi", ddi_panel=True),
}


def _suptitle(fig, recipe: Recipe, tables: list[SweepTable]) -> None:
    hashes = ", ".join(t.spec_hash[:12] for t in tables)
    fig.suptitle(f"{recipe.figure_id}  [spec {hashes}]", fontsize=10)


def _save(fig, out_path: Path) -> None:
    kwargs = {}
    if out_path.suffix.lower() == ".svg":
        kwargs["metadata"] = {"Date": None}  # keep re-renders byte-identical
    fig.savefig(out_path, dpi=150, **kwargs)
    plt.close(fig)


def _empty_figure(recipe: Recipe, tables: list[SweepTable], out_path: Path) -> dict:
    log.warning("%s: no data rows, rendering empty axes", recipe.figure_id)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.set_title("no data")
    ax.set_xlabel(recipe.x)
    _suptitle(fig, recipe, tables)
    _save(fig, out_path)
    return {"figure": recipe.figure_id, "out": str(out_path), "empty": True,
            "spec_hashes": [t.spec_hash for t in tables]}


def _oriented_grid(table: SweepTable, recipe: Recipe, column: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(x values, y values, grid[y, x]) with x = time axis, y = coordinate."""
    names = [a["name"] for a in table.axes]
    if sorted(names) != sorted([recipe.x, recipe.coordinate]):
        raise ValueError(
            f"{table.path}: recipe {recipe.figure_id} needs axes "
            f"({recipe.coordinate}, {recipe.x}), sweep has {names}"
        )
    grid = table.grid(column)
    if names[0] == recipe.x:
        grid = grid.T
    return table.axis_values(recipe.x), table.axis_values(recipe.coordinate), grid


def _ddi_curves(table: SweepTable, coordinate: str, values: np.ndarray, ottosim: str | None) -> dict:
    base = table.base
    if coordinate == "xi":
        return fetch_coefficients(xi=list(values), theta=[base["theta"]],
                                  Gamma=base["Gamma"], ottosim=ottosim)
    return fetch_coefficients(xi=[base["xi"]], theta=list(values),
                              Gamma=base["Gamma"], ottosim=ottosim)


def _render_heatmap(recipe: Recipe, tables: list[SweepTable], out_path: Path,
                    ottosim: str | None) -> dict:
    n_rows = len(recipe.panels) + (1 if recipe.ddi_panel else 0)
    n_cols = len(tables)
    fig, axes = plt.subplots(
        n_rows, n_cols, figsize=(4.2 * n_cols, 2.6 * n_rows), squeeze=False
    )
    for j, table in enumerate(tables):
        x, y, _ = _oriented_grid(table, recipe, recipe.panels[0])
        for i, column in enumerate(recipe.panels):
            ax = axes[i][j]
            _, _, grid = _oriented_grid(table, recipe, column)
            mesh = ax.pcolormesh(x, y, grid, shading="nearest", cmap="viridis")
            fig.colorbar(mesh, ax=ax)
            if recipe.zero_contour_on == column and np.nanmin(grid) < 0 < np.nanmax(grid):
                ax.contour(x, y, grid, levels=[0.0], colors="cyan", linewidths=2.5)
            ax.set_ylabel(recipe.coordinate)
            ax.set_title(HEAT_LABELS.get(column, column), fontsize=9)
        if recipe.ddi_panel:
            ax = axes[-1][j]
            ddi = _ddi_curves(table, recipe.coordinate, y, ottosim)
            ax.plot(y, ddi["omega12"], label="frequency shift")
            ax.plot(y, ddi["gamma12"], label="collective decay")
            ax.axhline(0.0, color="gray", lw=0.5)
            ax.set_xlabel(recipe.coordinate)
            ax.legend(fontsize=7)
        axes[-1][j].set_xlabel(recipe.coordinate if recipe.ddi_panel else recipe.x)
        for i in range(len(recipe.panels)):
            axes[i][j].set_xlabel(recipe.x)
    _suptitle(fig, recipe, tables)
    fig.tight_layout()
    _save(fig, out_path)
    return {"figure": recipe.figure_id, "out": str(out_path), "empty": False,
            "spec_hashes": [t.spec_hash for t in tables]}


def _render_lines(recipe: Recipe, tables: list[SweepTable], out_path: Path) -> dict:
    n = len(recipe.panels)
    n_rows = (n + 1) // 2
    n_cols = 2 if n > 1 else 1
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(4.5 * n_cols, 3.0 * n_rows),
                             squeeze=False)
    flat = [ax for row in axes for ax in row]
    for table in tables:
        x, family, _ = _oriented_grid(table, recipe, recipe.panels[0])
        for ax, column in zip(flat, recipe.panels):
            _, _, grid = _oriented_grid(table, recipe, column)
            for k, member in enumerate(family):
                ax.plot(x, grid[k], label=f"{recipe.coordinate}={member:g}")
            ax.set_xlabel(recipe.x)
            ax.set_ylabel(HEAT_LABELS.get(column, column))
    for ax in flat[n:]:
        ax.set_visible(False)
    flat[0].legend(fontsize=7)
    _suptitle(fig, recipe, tables)
    fig.tight_layout()
    _save(fig, out_path)
    return {"figure": recipe.figure_id, "out": str(out_path), "empty": False,
            "spec_hashes": [t.spec_hash for t in tables]}


def _zero_crossings(x: np.ndarray, y: np.ndarray) -> list[float]:
    zeros = []
    for i in range(len(x) - 1):
        if y[i] == 0.0:
            zeros.append(float(x[i]))
        elif y[i] * y[i + 1] < 0:
            zeros.append(float(x[i] - y[i] * (x[i + 1] - x[i]) / (y[i + 1] - y[i])))
    return zeros


def _local_maxima(x: np.ndarray, y: np.ndarray) -> list[float]:
    return [float(x[i]) for i in range(1, len(y) - 1)
            if y[i] > y[i - 1] and y[i] >= y[i + 1]]


def _render_overlay(recipe: Recipe, tables: list[SweepTable], out_path: Path,
                    compare: bool, ottosim: str | None) -> dict:
    table = tables[0]
    axes_names = [a["name"] for a in table.axes]
    if axes_names != ["xi"]:
        raise ValueError(f"{table.path}: fig9 needs a single xi axis, sweep has {axes_names}")
    xi = table.axis_values("xi")
    eta = table.column("eta")

    fig, (ax_top, ax_bot) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ax_top.plot(xi, eta, lw=1.2)
    ax_top.set_ylabel(HEAT_LABELS["eta"])
    ddi = _ddi_curves(table, "xi", xi, ottosim)
    gamma12 = np.asarray(ddi["gamma12"])
    ax_bot.plot(xi, ddi["omega12"], label="frequency shift")
    ax_bot.plot(xi, gamma12, label="collective decay")
    ax_bot.axhline(0.0, color="gray", lw=0.5)
    ax_bot.set_xlabel("xi")
    ax_bot.legend(fontsize=7)

    info: dict = {"figure": recipe.figure_id, "out": str(out_path), "empty": False,
                  "spec_hashes": [table.spec_hash]}
    if compare:
        zeros = _zero_crossings(xi, gamma12)
        peaks = _local_maxima(xi, eta)
        for z in zeros:
            for ax in (ax_top, ax_bot):
                ax.axvline(z, color="crimson", ls="--", lw=0.8)
        if peaks:
            peak_eta = np.interp(peaks, xi, eta)
            ax_top.plot(peaks, peak_eta, "o", ms=4, color="black")
        info["gamma12_zeros"] = zeros
        info["eta_peaks"] = peaks
    _suptitle(fig, recipe, tables)
    fig.tight_layout()
    _save(fig, out_path)
    return info


def render(
    figure_id: str,
    csv_paths: list[str | Path],
    out_path: str | Path,
    compare: bool = False,
    ottosim: str | None = None,
) -> dict:
    """Render one recipe from sweep CSVs; returns what was drawn (paths,
    spec hashes, and the overlay marks when --compare is active)."""
    if figure_id not in RECIPES:
        raise ValueError(f"unknown recipe {figure_id!r}; choose from {sorted(RECIPES)}")
    recipe = RECIPES[figure_id]
    if compare and recipe.kind != "overlay":
        raise ValueError("--compare is the fig9 correspondence overlay")
    out_path = Path(out_path)
    tables = [load_table(p, required=recipe.required_columns) for p in csv_paths]
    if not tables:
        raise ValueError("at least one CSV is required")
    if recipe.kind == "heatmap" and len(tables) > 2:
        raise ValueError(f"{figure_id} takes one or two CSVs")
    if any(next(iter(t.columns.values())).size == 0 for t in tables):
        return _empty_figure(recipe, tables, out_path)
    if recipe.kind == "heatmap":
        return _render_heatmap(recipe, tables, out_path, ottosim)
    if recipe.kind == "lines":
        return _render_lines(recipe, tables, out_path)
    return _render_overlay(recipe, tables, out_path, compare, ottosim)
