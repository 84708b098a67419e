"""Build scatter figures from simulation-suite CSV files.

Three figure kinds are supported, each reading plain CSV produced by the
``nma-forge`` command-line tools (the coupling is the column names only —
this package never imports the simulator):

``irregularity_scatter``
    One marker per network from a suite summary CSV: normalised geometry
    irregularity ``h2_over_k2`` on the x axis against a chosen quality
    metric column (default ``abs_dP_bar``).

``tau_vs_M``
    One marker per network from a suite summary CSV: total trial count
    ``M`` against the posterior-mean heterogeneity ``mean_tau`` with
    ``sd_tau`` error bars and a horizontal reference at the generating
    value.

``rank_bias_vs_degree``
    One marker per (treatment, rank) pair: the across-replication mean of
    each ``delta_P_<T>_r<r>`` column from a replication CSV, plotted
    against that treatment's comparison degree taken from a geometry CSV
    (``quantity,value`` rows including ``degree_<T>``).
"""

from __future__ import annotations

import csv
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

KINDS = ("irregularity_scatter", "tau_vs_M", "rank_bias_vs_degree")

_DELTA_P_RE = re.compile(r"^delta_P_(T\d+)_r(\d+)$")
_MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*")

# Fixed salt so SVG element ids do not change from run to run.
matplotlib.rcParams["svg.hashsalt"] = "figrender"


class RenderError(Exception):
    """Raised when an input CSV is missing, empty, or lacks a column."""


def read_table(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    """Read a CSV file into (header, rows-as-dicts).

    Raises RenderError if the file does not exist, has no header, or has
    no data rows.
    """
    path = Path(path)
    if not path.is_file():
        raise RenderError(f"input file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise RenderError(f"{path}: file is empty") from None
        rows = [dict(zip(header, line)) for line in reader if line]
    if not rows:
        raise RenderError(f"{path}: no data rows")
    return header, rows


def _require_columns(header: list[str], needed: tuple[str, ...],
                     path: str | Path) -> None:
    missing = [c for c in needed if c not in header]
    if missing:
        raise RenderError(f"{path}: missing column(s): {', '.join(missing)}")


def _column(rows: list[dict[str, str]], name: str,
            path: str | Path) -> np.ndarray:
    try:
        return np.array([float(row[name]) for row in rows])
    except ValueError as exc:
        raise RenderError(f"{path}: non-numeric value in column "
                          f"{name!r}: {exc}") from None


def irregularity_figure(suite_csv: str | Path, metric: str = "abs_dP_bar"):
    """Scatter a suite-summary metric against h2_over_k2.

    Returns (figure, n_points) with one labelled marker per CSV row.
    """
    header, rows = read_table(suite_csv)
    _require_columns(header, ("network_id", "h2_over_k2", metric), suite_csv)
    x = _column(rows, "h2_over_k2", suite_csv)
    y = _column(rows, metric, suite_csv)
    labels = [row["network_id"] for row in rows]

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.scatter(x, y, s=55, color="#1f77b4", edgecolor="black",
               linewidth=0.6, zorder=3)
    for xi, yi, label in zip(x, y, labels):
        ax.annotate(label, (xi, yi), textcoords="offset points",
                    xytext=(5, 4), fontsize=8)
    ax.set_xlabel(r"$h^2/\hat{k}^2$")
    ax.set_ylabel(metric)
    ax.set_title(f"{metric} vs. network irregularity")
    ax.grid(True, linewidth=0.4, alpha=0.5)
    fig.tight_layout()
    return fig, len(rows)


def tau_figure(suite_csv: str | Path, tau_true: float = 0.1):
    """Scatter posterior-mean heterogeneity against total trial count.

    Returns (figure, n_points) with one marker (plus sd_tau error bar)
    per CSV row and a dashed reference line at the generating value.
    """
    header, rows = read_table(suite_csv)
    _require_columns(header, ("network_id", "M", "mean_tau", "sd_tau"),
                     suite_csv)
    x = _column(rows, "M", suite_csv)
    y = _column(rows, "mean_tau", suite_csv)
    err = _column(rows, "sd_tau", suite_csv)
    labels = [row["network_id"] for row in rows]

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.errorbar(x, y, yerr=err, fmt="o", markersize=7, color="#d62728",
                markeredgecolor="black", markeredgewidth=0.6,
                ecolor="#999999", elinewidth=1.0, capsize=3, zorder=3)
    ax.axhline(tau_true, linestyle="--", linewidth=1.0, color="black",
               label=f"generating value {tau_true:g}")
    for xi, yi, label in zip(x, y, labels):
        ax.annotate(label, (xi, yi), textcoords="offset points",
                    xytext=(5, 4), fontsize=8)
    ax.set_xlabel("total number of trials M")
    ax.set_ylabel(r"posterior mean $\tilde\tau$")
    ax.set_title("Estimated heterogeneity vs. network size")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, linewidth=0.4, alpha=0.5)
    fig.tight_layout()
    return fig, len(rows)


def rank_bias_figure(replications_csv: str | Path,
                     geometry_csv: str | Path):
    """Scatter mean rank-probability bias against comparison degree.

    For every ``delta_P_<T>_r<r>`` column in the replication CSV the
    across-replication mean is plotted at that treatment's degree (from
    the geometry CSV), one marker style per rank.  Returns
    (figure, n_points) where n_points = n_treatments * n_ranks.
    """
    rep_header, rep_rows = read_table(replications_csv)
    cells: dict[tuple[str, int], str] = {}
    for name in rep_header:
        match = _DELTA_P_RE.match(name)
        if match:
            cells[(match.group(1), int(match.group(2)))] = name
    if not cells:
        raise RenderError(f"{replications_csv}: missing column(s): "
                          "delta_P_<treatment>_r<rank>")
    treatments = sorted({t for t, _ in cells}, key=lambda t: int(t[1:]))
    ranks = sorted({r for _, r in cells})

    geo_header, geo_rows = read_table(geometry_csv)
    _require_columns(geo_header, ("quantity", "value"), geometry_csv)
    quantities = {row["quantity"]: row["value"] for row in geo_rows}
    degrees = {}
    for treatment in treatments:
        key = f"degree_{treatment}"
        if key not in quantities:
            raise RenderError(f"{geometry_csv}: missing column(s): {key}")
        degrees[treatment] = float(quantities[key])

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    n_points = 0
    for idx, rank in enumerate(ranks):
        dodge = 0.12 * (idx - (len(ranks) - 1) / 2.0)
        xs, ys = [], []
        for treatment in treatments:
            column = cells.get((treatment, rank))
            if column is None:
                continue
            values = _column(rep_rows, column, replications_csv)
            xs.append(degrees[treatment] + dodge)
            ys.append(float(np.mean(values)))
        ax.scatter(xs, ys, s=45, marker=_MARKERS[idx % len(_MARKERS)],
                   edgecolor="black", linewidth=0.5,
                   label=f"rank {rank}", zorder=3)
        n_points += len(xs)
    ax.axhline(0.0, linewidth=0.8, color="black")
    ax.set_xlabel("comparison degree k")
    ax.set_ylabel(r"mean $\Delta P$ across replications")
    ax.set_title("Rank-probability bias vs. comparison degree")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, linewidth=0.4, alpha=0.5)
    fig.tight_layout()
    return fig, n_points


def _save(fig, out_path: str | Path) -> None:
    """Write the figure with run-to-run stable bytes, then release it."""
    out_path = Path(out_path)
    suffix = out_path.suffix.lower()
    metadata = None
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    try:
        fig.savefig(out_path, dpi=150, metadata=metadata)
    finally:
        plt.close(fig)


def render(kind: str, in_paths: list[str | Path], out_path: str | Path,
           metric: str = "abs_dP_bar", tau_true: float = 0.1) -> int:
    """Build one figure of the given kind and write it to out_path.

    Returns the number of plotted points.  All input parsing happens
    before the output file is opened, so a RenderError never leaves a
    partial image behind.
    """
    if kind == "irregularity_scatter":
        if len(in_paths) != 1:
            raise RenderError("irregularity_scatter needs exactly one "
                              "input CSV (the suite summary)")
        fig, n_points = irregularity_figure(in_paths[0], metric=metric)
    elif kind == "tau_vs_M":
        if len(in_paths) != 1:
            raise RenderError("tau_vs_M needs exactly one input CSV "
                              "(the suite summary)")
        fig, n_points = tau_figure(in_paths[0], tau_true=tau_true)
    elif kind == "rank_bias_vs_degree":
        if len(in_paths) != 2:
            raise RenderError("rank_bias_vs_degree needs two input CSVs: "
                              "replications,geometry")
        fig, n_points = rank_bias_figure(in_paths[0], in_paths[1])
    else:
        raise RenderError(f"unknown figure kind: {kind!r}")
    _save(fig, out_path)
    return n_points
