"""Render pipeline tables to PNG maps and band plots.

Map panels use a matplotlib polar axis as a south-polar view: the angle
is longitude and the radius is degrees from the South Pole (90 + lat),
so the pole sits at the center and the 45 S domain edge at the rim.
Rendering is deterministic: a fixed figure layout, explicit PNG metadata
and no timestamps, so one input table yields identical bytes on every
run with a fixed toolchain.
"""

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PNG_METADATA = {"Software": "nutricast-figures"}

KINDS = ("surface_map", "ci_band", "diff_map")


class MissingColumns(Exception):
    """Input table lacks a column the plot kind requires."""


@dataclass(frozen=True)
class PlotSpec:
    """What to draw: input table(s), plot kind, output path, options."""

    inputs: tuple
    kind: str
    out: str
    variable: str | None = None
    vmin: float | None = None
    vmax: float | None = None
    value_column: str = "value"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise ValueError("at least one input table is required")


def read_table(path):
    """Read a '#'-annotated delimited table -> (meta, columns dict)."""
    meta = {}
    header = None
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
            continue
        if not line.strip():
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    columns = {}
    for j, name in enumerate(header or []):
        columns[name] = [r[j] if j < len(r) else "" for r in rows]
    return meta, columns


def _floats(columns, name, path):
    if name not in columns:
        raise MissingColumns(f"{path}: column {name!r} not found")
    return np.array([float(v) if v != "" else np.nan for v in columns[name]])


def _polar_axes(fig, index, n_panels):
    ax = fig.add_subplot(n_panels, 1, index, projection="polar")
    ax.set_theta_zero_location("N")
    ax.set_rlim(0.0, 46.0)
    ax.set_yticks([15.0, 30.0, 45.0])
    ax.set_yticklabels(["75S", "60S", "45S"], fontsize=7)
    ax.set_xticks(np.deg2rad([0, 90, 180, 270]))
    ax.set_xticklabels(["0", "90E", "180", "90W"], fontsize=7)
    ax.grid(True, linewidth=0.3, alpha=0.5)
    return ax


def _draw_panel(ax, path, spec, diverging=False):
    meta, columns = read_table(path)
    lat = _floats(columns, "lat_center", path)
    lon = _floats(columns, "lon_center", path)
    values = _floats(columns, spec.value_column, path)
    theta = np.deg2rad(lon)
    radius = 90.0 + lat
    if diverging:
        span = float(np.max(np.abs(values))) if values.size else 1.0
        span = span if span > 0.0 else 1.0
        vmin = -span if spec.vmin is None else spec.vmin
        vmax = span if spec.vmax is None else spec.vmax
        cmap = "RdBu_r"
    else:
        vmin, vmax = spec.vmin, spec.vmax
        cmap = "viridis"
    sc = ax.scatter(
        theta, radius, c=values, s=14, cmap=cmap, vmin=vmin, vmax=vmax, linewidths=0
    )
    units = meta.get("units", "umol/kg")
    label = spec.variable or meta.get("variable", spec.value_column)
    ax.set_title(label, fontsize=9)
    cbar = ax.figure.colorbar(sc, ax=ax, shrink=0.8, pad=0.1)
    cbar.set_label(units, fontsize=7)
    cbar.ax.tick_params(labelsize=6)


def _diff_panel_paths(spec):
    """Sibling discovery: grid_<t>_diff.csv sits next to _ref and _mean."""
    if len(spec.inputs) == 3:
        return list(spec.inputs)
    path = Path(spec.inputs[0])
    if "_diff" in path.name:
        ref = path.with_name(path.name.replace("_diff", "_ref"))
        mean = path.with_name(path.name.replace("_diff", "_mean"))
        if ref.exists() and mean.exists():
            return [str(ref), str(mean), str(path)]
    return [str(path)]


def render_map(spec):
    """South-polar map(s) for grid tables; returns the PNG path.

    surface_map draws one panel. diff_map draws the reference, model and
    reference-minus-model rows when all three grids are available (passed
    explicitly or discovered next to the difference table), otherwise a
    single diverging-colored difference panel.
    """
    if spec.kind == "diff_map":
        paths = _diff_panel_paths(spec)
    else:
        paths = [spec.inputs[0]]
    n = len(paths)
    fig = plt.figure(figsize=(4.2, 3.6 * n))
    for i, path in enumerate(paths, start=1):
        ax = _polar_axes(fig, i, n)
        last_is_diff = spec.kind == "diff_map" and i == n
        _draw_panel(ax, path, spec, diverging=last_is_diff)
    fig.savefig(spec.out, dpi=150, metadata=PNG_METADATA)
    plt.close(fig)
    return spec.out


def render_ci_band(spec):
    """Sorted-by-truth confidence band plot for a prediction table.

    The table needs mean, ci_low, ci_high and truth columns; rows are
    ordered by truth, the mean is a line, the 95% interval a shaded band
    and the truth itself the reference line.
    """
    path = spec.inputs[0]
    meta, columns = read_table(path)
    mean = _floats(columns, "mean", path)
    ci_low = _floats(columns, "ci_low", path)
    ci_high = _floats(columns, "ci_high", path)
    truth = _floats(columns, "truth", path)
    keep = ~np.isnan(truth)
    order = np.argsort(truth[keep], kind="stable")
    mean, ci_low, ci_high, truth = (
        a[keep][order] for a in (mean, ci_low, ci_high, truth)
    )
    x = np.arange(truth.size)

    fig, ax = plt.subplots(figsize=(5.4, 3.4))
    ax.fill_between(x, ci_low, ci_high, color="tab:blue", alpha=0.3,
                    label="95% interval", linewidth=0)
    ax.plot(x, mean, color="tab:blue", linewidth=1.0, label="predicted mean")
    ax.plot(x, truth, color="gray", linestyle=":", linewidth=1.0, label="ground truth")
    target = spec.variable or meta.get("target", "value")
    ax.set_xlabel("test samples (sorted by ground truth)", fontsize=8)
    ax.set_ylabel(f"{target} (umol/kg)", fontsize=8)
    ax.tick_params(labelsize=7)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(spec.out, dpi=150, metadata=PNG_METADATA)
    plt.close(fig)
    return spec.out


def render(spec):
    if spec.kind == "ci_band":
        return render_ci_band(spec)
    return render_map(spec)
