"""Hydrographic table ingestion, QC filtering and the regional cut.

Input tables are UTF-8 delimited text (comma or tab, auto-detected from
the header line) with one header row. A schema maps logical field names
to column names; WOCE-style integer QC flags ride in optional flag
columns. Missing data is encoded as an empty cell or a numeric sentinel
(default -999 / -9999); both parse to an absent value.

Flag convention: WOCE bottle flags, with only flag 2 ("acceptable")
passing by default. The accepted set is configurable because source
archives differ. Flags are only consulted for fields that carry a value:
a row whose phosphate is absent survives QC (it is still usable for
prediction), while a present value with a non-accepted flag drops the
whole row.
"""

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MalformedRow, MissingColumn

INPUT_FIELDS = (
    "latitude",
    "longitude",
    "pressure",
    "temperature",
    "salinity",
    "oxygen",
    "nitrate",
)
LABEL_FIELDS = ("phosphate", "silicate")
ALL_FIELDS = INPUT_FIELDS + LABEL_FIELDS

DEFAULT_SENTINELS = frozenset({-999.0, -9999.0})


@dataclass(frozen=True)
class QcPolicy:
    """Which flags pass QC and which numeric values mean "missing"."""

    accepted_flags: frozenset = frozenset({2})
    missing_sentinels: frozenset = DEFAULT_SENTINELS

    def __post_init__(self):
        if not self.accepted_flags:
            raise ValueError("accepted_flags must be non-empty")


@dataclass
class HydroSample:
    """One bottle/profile measurement row.

    Inputs and labels are None when absent. qc_flags maps field name to
    the integer flag parsed from the corresponding flag column.
    """

    latitude: float
    longitude: float
    pressure: float | None = None
    temperature: float | None = None
    salinity: float | None = None
    oxygen: float | None = None
    nitrate: float | None = None
    phosphate: float | None = None
    silicate: float | None = None
    qc_flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 180]")
        if self.pressure is not None and self.pressure < 0.0:
            raise ValueError(f"pressure {self.pressure} is negative")

    def value(self, name):
        return getattr(self, name)

    def missing_inputs(self):
        return [f for f in INPUT_FIELDS if getattr(self, f) is None]

    def has_labels(self):
        return self.phosphate is not None or self.silicate is not None


@dataclass(frozen=True)
class TableSchema:
    """Logical field -> column name map for one table layout.

    The seven input columns are required; label and flag columns are used
    when present in the header and skipped otherwise.
    """

    values: dict
    flags: dict

    @classmethod
    def default(cls):
        return cls(
            values={f: f for f in ALL_FIELDS},
            flags={f: f + "_flag" for f in ALL_FIELDS},
        )

    @classmethod
    def from_config(cls, columns=None, flag_columns=None):
        base = cls.default()
        values = dict(base.values)
        flags = dict(base.flags)
        values.update(columns or {})
        flags.update(flag_columns or {})
        return cls(values=values, flags=flags)


@dataclass(frozen=True)
class DroppedRow:
    """Why a row left the pipeline; index is the position in the input."""

    index: int
    reason: str


def _text_lines(source):
    if isinstance(source, (str, Path)):
        return Path(source).read_text(encoding="utf-8").splitlines()
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def _sniff_delimiter(header_line):
    return "\t" if "\t" in header_line else ","


def _parse_cell(raw, row_index, column, sentinels):
    raw = raw.strip()
    if raw == "":
        return None
    try:
        v = float(raw)
    except ValueError:
        raise MalformedRow(row_index, f"non-numeric value {raw!r} in column {column!r}")
    if v in sentinels:
        return None
    return v


def parse_hydro_table(source, schema=None, sentinels=DEFAULT_SENTINELS):
    """Parse a delimited hydrographic table into HydroSamples.

    source may be a path or an open (text or binary) stream. Row order is
    preserved; sentinel-valued and empty cells become absent values.
    Raises MissingColumn when a required schema column is absent from the
    header and MalformedRow (with the 0-based data row index) for
    non-numeric cells or physically invalid coordinates.
    """
    schema = schema or TableSchema.default()
    lines = _text_lines(source)
    if not lines:
        raise MissingColumn("empty input: no header row")
    reader = csv.reader(lines, delimiter=_sniff_delimiter(lines[0]))
    header = [h.strip() for h in next(reader)]
    position = {name: i for i, name in enumerate(header)}

    for f in INPUT_FIELDS:
        if schema.values[f] not in position:
            raise MissingColumn(f"column {schema.values[f]!r} (field {f!r}) not in header")

    value_cols = {f: position[c] for f, c in schema.values.items() if c in position}
    flag_cols = {f: position[c] for f, c in schema.flags.items() if c in position}

    samples = []
    for row_index, row in enumerate(reader):
        if not row or all(cell.strip() == "" for cell in row):
            continue
        values = {}
        for f, col in value_cols.items():
            raw = row[col] if col < len(row) else ""
            values[f] = _parse_cell(raw, row_index, header[col], sentinels)
        flags = {}
        for f, col in flag_cols.items():
            raw = (row[col] if col < len(row) else "").strip()
            if raw == "":
                continue
            try:
                flags[f] = int(float(raw))
            except ValueError:
                raise MalformedRow(
                    row_index, f"non-numeric flag {raw!r} in column {header[col]!r}"
                )
        if values.get("latitude") is None or values.get("longitude") is None:
            raise MalformedRow(row_index, "latitude/longitude missing")
        try:
            samples.append(HydroSample(qc_flags=flags, **values))
        except ValueError as exc:
            raise MalformedRow(row_index, str(exc))
    return samples


def write_hydro_table(samples, destination, schema=None, delimiter=","):
    """Serialize samples back to delimited text.

    Floats are written with repr so a parse -> write -> parse round trip
    is bit-identical for finite values. Returns the path or stream given.
    """
    schema = schema or TableSchema.default()
    flagged = [f for f in ALL_FIELDS if any(f in s.qc_flags for s in samples)]
    header = [schema.values[f] for f in ALL_FIELDS] + [schema.flags[f] for f in flagged]

    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for s in samples:
        row = [repr(s.value(f)) if s.value(f) is not None else "" for f in ALL_FIELDS]
        row += [str(s.qc_flags[f]) if f in s.qc_flags else "" for f in flagged]
        writer.writerow(row)

    text = buf.getvalue()
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text, encoding="utf-8")
    else:
        destination.write(text)
    return destination


def apply_qc_filter(samples, policy=None):
    """Keep rows whose present fields all carry accepted flags and whose
    seven inputs are all present.

    Returns (kept, dropped) with relative order preserved; dropped rows
    carry their input index and a reason string. Never raises: filtering
    is total. Idempotent, and kept is always a subsequence of samples.
    """
    policy = policy or QcPolicy()
    kept, dropped = [], []
    for i, s in enumerate(samples):
        reason = None
        for f, flag in sorted(s.qc_flags.items()):
            if s.value(f) is not None and flag not in policy.accepted_flags:
                reason = f"flag {flag} on {f} not in accepted set"
                break
        if reason is None:
            missing = s.missing_inputs()
            if missing:
                reason = f"missing input {missing[0]}"
        if reason is None:
            kept.append(s)
        else:
            dropped.append(DroppedRow(i, reason))
    return kept, dropped


def filter_southern_ocean(samples, lat_cut=-45.0):
    """Keep rows strictly south of lat_cut (default 45 S, exclusive).

    The boundary is exclusive: a row at exactly lat_cut is dropped.
    Returns (kept, dropped) like apply_qc_filter.
    """
    if not -90.0 < lat_cut < 0.0:
        raise ValueError(f"lat_cut {lat_cut} outside (-90, 0)")
    kept, dropped = [], []
    for i, s in enumerate(samples):
        if s.latitude < lat_cut:
            kept.append(s)
        else:
            dropped.append(DroppedRow(i, f"latitude {s.latitude} not below {lat_cut}"))
    return kept, dropped


def training_eligible(samples):
    """Rows with all inputs and at least one label (the trainable subset)."""
    return [s for s in samples if not s.missing_inputs() and s.has_labels()]
