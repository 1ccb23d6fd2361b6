"""Figure rendering from permris CSV files.

Three figure kinds, one per CSV schema:

  beta_ensemble    beta.csv     delta,beta,perm_id,M,seed
  tau_cdf          tau_cdf.csv  tau,cdf,perm_id,M,delta,seed
  pattern_heatmap  pattern.csv  rho_x,rho_y,value,M,perm_id

This package reads only the CSVs; it never imports the producer.  Rendering
is read-only and deterministic: repeated runs yield identical data extents.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("beta_ensemble", "tau_cdf", "pattern_heatmap")

SCHEMAS = {
    "beta_ensemble": ("delta", "beta", "perm_id", "M", "seed"),
    "tau_cdf": ("tau", "cdf", "perm_id", "M", "delta", "seed"),
    "pattern_heatmap": ("rho_x", "rho_y", "value", "M", "perm_id"),
}

FLOAT_COLUMNS = {"delta", "beta", "tau", "cdf", "rho_x", "rho_y", "value"}


class SchemaError(ValueError):
    """Input CSV does not match the declared schema."""

    def __init__(self, path, column):
        self.column = column
        super().__init__(f"{path}: missing column {column!r}")


@dataclass(frozen=True)
class FigureSpec:
    input_paths: tuple
    figure_kind: str
    output_image_path: str
    highlight_envelopes: bool = True

    def __post_init__(self):
        if self.figure_kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.figure_kind!r}; choose from {KINDS}")


def load_rows(paths, kind: str) -> list[dict]:
    """Read and type the CSV rows, validating the kind's schema."""
    columns = SCHEMAS[kind]
    rows = []
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            for column in columns:
                if column not in header:
                    raise SchemaError(path, column)
            for raw in reader:
                row = dict(raw)
                for column in columns:
                    if column in FLOAT_COLUMNS:
                        row[column] = float(row[column])
                rows.append(row)
    if not rows:
        raise SchemaError(paths[0] if paths else "<none>", "<no data rows>")
    return rows


def _beta_ensemble(ax, rows, highlight: bool) -> dict:
    curves = {}
    for row in rows:
        curves.setdefault(row["perm_id"], []).append((row["delta"], row["beta"]))
    for pid in curves:
        curves[pid] = sorted(curves[pid])
    for pid, pts in curves.items():
        if pid == "identity":
            continue
        xs, ys = zip(*pts)
        ax.plot(xs, ys, color="black", alpha=0.35, linewidth=0.8)
    # pointwise envelopes over the deltas shared by every curve
    common = sorted(set.intersection(*(set(x for x, _ in pts) for pts in curves.values())))
    if highlight and common:
        table = {
            pid: dict(pts) for pid, pts in curves.items() if pid != "identity"
        } or {pid: dict(pts) for pid, pts in curves.items()}
        top = [max(c[d] for c in table.values()) for d in common]
        bottom = [min(c[d] for c in table.values()) for d in common]
        ax.plot(common, top, color="tab:blue", linewidth=2.0, label="widest")
        ax.plot(common, bottom, color="tab:red", linewidth=2.0, label="narrowest")
    if "identity" in curves:
        xs, ys = zip(*curves["identity"])
        ax.plot(xs, ys, color="tab:green", linewidth=2.0, label="identity")
    ax.set_xlabel(r"$\delta$")
    ax.set_ylabel(r"$\beta$")
    ax.set_ylim(-0.02, 1.02)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best", fontsize=8)
    deltas = [row["delta"] for row in rows]
    betas = [row["beta"] for row in rows]
    return {"x": (min(deltas), max(deltas)), "y": (min(betas), max(betas)),
            "n_curves": len(curves)}


def _tau_cdf(ax, rows) -> dict:
    groups = {}
    for row in rows:
        groups.setdefault((row["M"], row["delta"]), []).append((row["tau"], row["cdf"]))
    for (m_side, delta), pts in sorted(groups.items()):
        pts.sort()
        xs = [t for t, _ in pts]
        ys = [c for _, c in pts]
        ax.step(xs, ys, where="post", label=f"M={m_side}, delta={delta}")
    ax.set_xlabel(r"$\tau$")
    ax.set_ylabel("empirical CDF")
    ax.set_ylim(0.0, 1.02)
    ax.legend(loc="best", fontsize=8)
    taus = [row["tau"] for row in rows]
    cdfs = [row["cdf"] for row in rows]
    return {"x": (min(taus), max(taus)), "y": (min(cdfs), max(cdfs)),
            "n_groups": len(groups)}


def _pattern_grid(rows) -> dict:
    """Pivot pattern rows into per-permutation (rho_x, rho_y, matrix) grids."""
    panels = {}
    for row in rows:
        panels.setdefault(row["perm_id"], []).append((row["rho_x"], row["rho_y"], row["value"]))
    grids = {}
    for pid, triples in panels.items():
        xs = sorted({t[0] for t in triples})
        ys = sorted({t[1] for t in triples})
        index = {(x, y): v for x, y, v in triples}
        matrix = np.array([[index[(x, y)] for y in ys] for x in xs])
        grids[pid] = (np.array(xs), np.array(ys), matrix)
    return grids


def _pattern_heatmap(fig, rows) -> dict:
    grids = _pattern_grid(rows)
    n = len(grids)
    axes = fig.subplots(1, n, squeeze=False)[0]
    for ax, (pid, (xs, ys, matrix)) in zip(axes, sorted(grids.items())):
        mesh = ax.pcolormesh(xs, ys, matrix.T, shading="nearest", vmin=0.0, vmax=1.0)
        ax.set_title(str(pid), fontsize=9)
        ax.set_xlabel(r"$\rho_x$")
        ax.set_ylabel(r"$\rho_y$")
        fig.colorbar(mesh, ax=ax, shrink=0.8)
    values = [row["value"] for row in rows]
    xs = [row["rho_x"] for row in rows]
    ys = [row["rho_y"] for row in rows]
    return {"x": (min(xs), max(xs)), "y": (min(ys), max(ys)),
            "value": (min(values), max(values)), "n_panels": n}


def render(spec: FigureSpec) -> dict:
    """Render one figure and return a summary with the plotted data extents."""
    rows = load_rows(spec.input_paths, spec.figure_kind)
    if spec.figure_kind == "pattern_heatmap":
        fig = plt.figure(figsize=(4.2 * len({r['perm_id'] for r in rows}) + 0.8, 4.0))
        extents = _pattern_heatmap(fig, rows)
    else:
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        if spec.figure_kind == "beta_ensemble":
            extents = _beta_ensemble(ax, rows, spec.highlight_envelopes)
        else:
            extents = _tau_cdf(ax, rows)
    fig.tight_layout()
    fig.savefig(spec.output_image_path, dpi=150)
    plt.close(fig)
    return {
        "kind": spec.figure_kind,
        "out": str(spec.output_image_path),
        "n_rows": len(rows),
        "extents": extents,
    }
