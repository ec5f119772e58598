"""Apply a trained model to external (ESM- or float-style) tables.

External rows follow the same delimited-text convention as the
hydrographic ingester, with an optional source tag column ("esm" or
"argo") and optional reference phosphate/silicate columns for ESM
comparison. Surface tables may omit pressure entirely; missing pressure
defaults to the 5 dbar surface convention. Rows missing any other input
are dropped and counted, as are rows at or north of the regional cut, so
the model never extrapolates out of its training domain. No depth cap is
applied to profile-style inputs.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadCell,
    EmptyAfterFiltering,
    GridMismatch,
    MalformedRow,
    MissingColumn,
    StandardizerMismatch,
)
from .features import COLUMNS
from .ingest import DEFAULT_SENTINELS, DroppedRow, _parse_cell, _sniff_delimiter, _text_lines
from .projection import project_many
from .uncertainty import mc_dropout_predict

SURFACE_PRESSURE_DBAR = 5.0

EXTERNAL_INPUTS = ("temperature", "salinity", "oxygen", "nitrate")
REFERENCE_FIELDS = ("phosphate", "silicate")


@dataclass
class ExternalRow:
    """One external data point awaiting prediction."""

    row_id: int
    latitude: float
    longitude: float
    pressure: float | None
    temperature: float | None
    salinity: float | None
    oxygen: float | None
    nitrate: float | None
    phosphate_ref: float | None = None
    silicate_ref: float | None = None
    source: str = "esm"


def parse_external_table(source, columns=None, source_tag="esm", sentinels=DEFAULT_SENTINELS):
    """Parse an external table; `columns` overrides default column names.

    latitude/longitude/temperature/salinity/oxygen/nitrate columns are
    required; pressure, phosphate, silicate and source are picked up when
    present. Row ids are the 0-based data-row positions.
    """
    names = {f: f for f in ("latitude", "longitude", "pressure", "source") + EXTERNAL_INPUTS + REFERENCE_FIELDS}
    names.update(columns or {})
    lines = _text_lines(source)
    if not lines:
        raise MissingColumn("empty input: no header row")
    reader = csv.reader(lines, delimiter=_sniff_delimiter(lines[0]))
    header = [h.strip() for h in next(reader)]
    position = {name: i for i, name in enumerate(header)}
    for f in ("latitude", "longitude") + EXTERNAL_INPUTS:
        if names[f] not in position:
            raise MissingColumn(f"column {names[f]!r} (field {f!r}) not in header")

    def cell(row, f, row_index):
        col = position.get(names[f])
        if col is None or col >= len(row):
            return None
        return _parse_cell(row[col], row_index, names[f], sentinels)

    rows = []
    for row_index, row in enumerate(reader):
        if not row or all(c.strip() == "" for c in row):
            continue
        lat = cell(row, "latitude", row_index)
        lon = cell(row, "longitude", row_index)
        if lat is None or lon is None:
            raise MalformedRow(row_index, "latitude/longitude missing")
        tag = source_tag
        col = position.get(names["source"])
        if col is not None and col < len(row) and row[col].strip():
            tag = row[col].strip()
        rows.append(
            ExternalRow(
                row_id=row_index,
                latitude=lat,
                longitude=lon,
                pressure=cell(row, "pressure", row_index),
                temperature=cell(row, "temperature", row_index),
                salinity=cell(row, "salinity", row_index),
                oxygen=cell(row, "oxygen", row_index),
                nitrate=cell(row, "nitrate", row_index),
                phosphate_ref=cell(row, "phosphate", row_index),
                silicate_ref=cell(row, "silicate", row_index),
                source=tag,
            )
        )
    return rows


@dataclass
class ExternalPredictions:
    """Kept rows with their MC summaries, plus the drop accounting."""

    rows: list
    summaries: list
    dropped: list
    surface_pressure: float

    @property
    def n_dropped(self):
        return len(self.dropped)


def predict_external_table(
    model,
    standardizer,
    rows,
    surface_pressure=SURFACE_PRESSURE_DBAR,
    n_samples=100,
    seed=0,
    lat_cut=-45.0,
):
    """Project, standardize and MC-predict every usable external row.

    Rows missing pressure get the surface default; rows missing any other
    input or sitting at/north of lat_cut are dropped with a reason.
    Raises StandardizerMismatch when the standardizer hash differs from
    the one recorded on the model, and EmptyAfterFiltering when nothing
    survives. Output order follows input order and
    len(rows) == len(kept) + len(dropped).
    """
    if model.standardizer_hash is not None:
        if standardizer.state_hash() != model.standardizer_hash:
            raise StandardizerMismatch(
                f"standardizer hash {standardizer.state_hash()} != "
                f"model's recorded {model.standardizer_hash}"
            )

    kept, dropped = [], []
    for r in rows:
        missing = [f for f in EXTERNAL_INPUTS if getattr(r, f) is None]
        if missing:
            dropped.append(DroppedRow(r.row_id, f"missing input {missing[0]}"))
            continue
        if not r.latitude < lat_cut:
            dropped.append(
                DroppedRow(r.row_id, f"latitude {r.latitude} not below {lat_cut}")
            )
            continue
        kept.append(r)
    if not kept:
        raise EmptyAfterFiltering(f"no rows left out of {len(rows)}")

    raw = np.empty((len(kept), len(COLUMNS)))
    lats = np.array([r.latitude for r in kept])
    lons = np.array([r.longitude for r in kept])
    raw[:, 0], raw[:, 1] = project_many(lats, lons)
    raw[:, 2] = [surface_pressure if r.pressure is None else r.pressure for r in kept]
    raw[:, 3] = [r.temperature for r in kept]
    raw[:, 4] = [r.salinity for r in kept]
    raw[:, 5] = [r.oxygen for r in kept]
    raw[:, 6] = [r.nitrate for r in kept]
    X = standardizer.transform(raw)

    summaries = mc_dropout_predict(
        model, X, n_samples=n_samples, seed=seed, row_ids=[r.row_id for r in kept]
    )
    return ExternalPredictions(
        rows=kept, summaries=summaries, dropped=dropped, surface_pressure=surface_pressure
    )


@dataclass
class GridField:
    """Lat/lon-binned mean field: (i, j) cell -> (mean, count).

    Cell (i, j) covers [i*cell_lat, (i+1)*cell_lat) x [j*cell_lon,
    (j+1)*cell_lon) in degrees; centers sit at the half-cell offset.
    """

    cell: tuple
    cells: dict
    variable: str
    units: str = "umol/kg"

    def center(self, key):
        i, j = key
        return ((i + 0.5) * self.cell[0], (j + 0.5) * self.cell[1])

    def weighted_mean(self):
        total = sum(m * c for m, c in self.cells.values())
        count = sum(c for _, c in self.cells.values())
        return total / count


def _as_cell(cell):
    pair = (cell, cell) if isinstance(cell, (int, float)) else tuple(cell)
    if len(pair) != 2 or pair[0] <= 0 or pair[1] <= 0:
        raise BadCell(f"cell size must be positive, got {cell!r}")
    return (float(pair[0]), float(pair[1]))


def grid_bin_mean(points, cell=1.0, variable="value", units="umol/kg"):
    """Arithmetic mean of (lat, lon, value) points per grid cell.

    Cells with no points are simply absent. Non-finite values are
    rejected so cell means stay finite. Longitude 180 wraps into the
    [-180, 180) cell row.
    """
    cell = _as_cell(cell)
    sums, counts = {}, {}
    for lat, lon, value in points:
        if not (math.isfinite(lat) and math.isfinite(lon) and math.isfinite(value)):
            raise ValueError(f"non-finite grid point ({lat}, {lon}, {value})")
        if lon == 180.0:
            lon = -180.0
        key = (math.floor(lat / cell[0]), math.floor(lon / cell[1]))
        sums[key] = sums.get(key, 0.0) + value
        counts[key] = counts.get(key, 0) + 1
    cells = {k: (sums[k] / counts[k], counts[k]) for k in sums}
    return GridField(cell=cell, cells=cells, variable=variable, units=units)


def diff_grids(a, b):
    """Cellwise a - b over the cells present in both grids.

    Counts become min(count_a, count_b). Grids must share cell size and
    units.
    """
    if a.cell != b.cell:
        raise GridMismatch(f"cell sizes differ: {a.cell} vs {b.cell}")
    if a.units != b.units:
        raise GridMismatch(f"units differ: {a.units} vs {b.units}")
    shared = set(a.cells) & set(b.cells)
    cells = {
        k: (a.cells[k][0] - b.cells[k][0], min(a.cells[k][1], b.cells[k][1]))
        for k in shared
    }
    variable = a.variable if a.variable == b.variable else f"{a.variable}-{b.variable}"
    return GridField(cell=a.cell, cells=cells, variable=variable, units=a.units)
