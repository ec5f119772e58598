"""Synthetic Southern Ocean tables for demos and end-to-end tests.

Generates hydrographic-looking rows with a known nonlinear relationship
between the inputs and the two targets, so the full pipeline can run
without the real cruise extraction. The phosphate target is a sine of
temperature (strongly nonlinear, defeats the linear baseline); the
silicate target is a pressure-driven tanh ramp at realistic silicate
magnitudes. Both carry Gaussian noise with a configurable, known floor.
"""

import numpy as np

from .ingest import ALL_FIELDS
from .rng import rng_for

PHOSPHATE_NOISE_STD = 0.01
SILICATE_NOISE_STD = 1.0


def phosphate_truth(temperature):
    # sine of the (approximately) standardized temperature: uniform(-2, 12)
    # has mean 5 and std ~4.04, so the argument spans about +/-1.73 rad
    return 1.5 + np.sin((temperature - 5.0) / 4.0)


def silicate_truth(pressure):
    return 60.0 + 40.0 * np.tanh((pressure - 700.0) / 300.0)


def make_synthetic_samples(
    n,
    seed=0,
    phosphate_noise=PHOSPHATE_NOISE_STD,
    silicate_noise=SILICATE_NOISE_STD,
):
    """Return a dict of column arrays for n synthetic bottle rows."""
    rng = rng_for(seed, "synthetic-table")
    lat = rng.uniform(-75.0, -50.0, n)
    lon = rng.uniform(-180.0, 180.0, n)
    pressure = rng.uniform(5.0, 1500.0, n)
    temperature = rng.uniform(-2.0, 12.0, n)
    salinity = rng.uniform(33.5, 35.2, n)
    oxygen = rng.uniform(180.0, 360.0, n)
    nitrate = rng.uniform(8.0, 40.0, n)
    phosphate = phosphate_truth(temperature) + phosphate_noise * rng.standard_normal(n)
    silicate = silicate_truth(pressure) + silicate_noise * rng.standard_normal(n)
    return {
        "latitude": lat,
        "longitude": lon,
        "pressure": pressure,
        "temperature": temperature,
        "salinity": salinity,
        "oxygen": oxygen,
        "nitrate": nitrate,
        "phosphate": phosphate,
        "silicate": silicate,
    }


def write_synthetic_hydro_csv(path, n, seed=0, with_flags=True, **noise):
    """Write a synthetic hydrographic CSV parseable by the default schema."""
    cols = make_synthetic_samples(n, seed=seed, **noise)
    header = list(ALL_FIELDS)
    if with_flags:
        header += [f + "_flag" for f in ALL_FIELDS]
    lines = [",".join(header)]
    for i in range(n):
        row = [repr(float(cols[f][i])) for f in ALL_FIELDS]
        if with_flags:
            row += ["2"] * len(ALL_FIELDS)
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_synthetic_external_csv(path, n, seed=0, source="esm", with_pressure=False):
    """Write an external-style surface table with reference nutrient columns."""
    cols = make_synthetic_samples(n, seed=seed)
    fields = ["latitude", "longitude", "temperature", "salinity", "oxygen", "nitrate",
              "phosphate", "silicate"]
    if with_pressure:
        fields.insert(2, "pressure")
    header = fields + ["source"]
    lines = [",".join(header)]
    for i in range(n):
        row = [repr(float(cols[f][i])) for f in fields]
        row.append(source)
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path
