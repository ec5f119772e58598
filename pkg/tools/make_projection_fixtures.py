#!/usr/bin/env python3
"""Generate the committed Antarctic Polar Stereographic oracle fixtures.

Computes forward-projected coordinates for a set of Southern Ocean points
with a 50-digit mpmath implementation of the standard ellipsoidal polar
stereographic (variant B) formulas on WGS 84 (standard parallel 71 S,
central meridian 0, no false offsets).

The generator is anchored to the published IOGP Guidance Note 7-2 worked
example for this projection method on WGS 84 (standard parallel 71 S,
origin 70 E, false easting/northing 6,000,000 m): (75 S, 120 E) must map
to E = 7,255,380.79 m, N = 7,053,389.56 m, implied scale 0.97276901.
The script aborts if the anchor disagrees by more than 0.01 m.

Run from the repository root:

    python3 tools/make_projection_fixtures.py > tests/fixtures/aps_oracle.json
"""

import json
import sys

from mpmath import mp, atan2, cos, mpf, pi, sin, sqrt, tan

mp.dps = 50

A = mpf("6378137.0")
INV_F = mpf("298.257223563")
F = 1 / INV_F
E2 = F * (2 - F)
E = sqrt(E2)

# Points spanning the model's Southern Ocean domain, plus the standard
# parallel and near-pole edge cases.
POINTS = [
    (-71.0, 0.0),
    (-75.0, 50.0),
    (-60.0, 45.0),
    (-60.0, -45.0),
    (-45.000001, 179.999999),
    (-50.0, -120.0),
    (-55.5, 63.25),
    (-66.0, -179.5),
    (-78.125, 12.5),
    (-84.0, -100.0),
    (-89.9, 30.0),
    (-46.5, 150.0),
    (-72.75, -58.125),
    (-63.333333, 88.8),
]


def south_ps_t(phi):
    return tan(pi / 4 + phi / 2) / ((1 + E * sin(phi)) / (1 - E * sin(phi))) ** (E / 2)


def forward(lat_deg, lon_deg, lat_ts_deg, lon0_deg, fe, fn):
    phi = mpf(repr(lat_deg)) * pi / 180
    lam = mpf(repr(lon_deg)) * pi / 180
    phi_f = mpf(repr(lat_ts_deg)) * pi / 180
    lam0 = mpf(repr(lon0_deg)) * pi / 180
    t_f = south_ps_t(phi_f)
    m_f = cos(phi_f) / sqrt(1 - E2 * sin(phi_f) ** 2)
    rho = A * m_f * south_ps_t(phi) / t_f
    theta = lam - lam0
    return fe + rho * sin(theta), fn + rho * cos(theta)


def main():
    anchor_e, anchor_n = forward(-75.0, 120.0, -71.0, 70.0, mpf(6000000), mpf(6000000))
    err = max(abs(anchor_e - mpf("7255380.79")), abs(anchor_n - mpf("7053389.56")))
    if err > mpf("0.01"):
        sys.exit(f"anchor check failed: {mp.nstr(err, 6)} m from the published example")

    fixtures = {
        "provenance": (
            "Computed with tools/make_projection_fixtures.py (mpmath, 50 decimal digits) "
            "implementing the standard ellipsoidal polar stereographic variant-B forward "
            "mapping on WGS 84 (a=6378137, 1/f=298.257223563, standard parallel 71 S, "
            "central meridian 0, false easting/northing 0). Generator validated against "
            "the published IOGP Guidance Note 7-2 worked example for this method "
            "(75 S, 120 E with origin 70 E and 6,000,000 m false offsets -> "
            "E 7255380.79 m, N 7053389.56 m); anchor agreement better than 0.01 m."
        ),
        "anchor_residual_m": mp.nstr(err, 3),
        "points": [
            {
                "lat": lat,
                "lon": lon,
                "x": float(mp.nstr(x, 17)),
                "y": float(mp.nstr(y, 17)),
            }
            for lat, lon in POINTS
            for x, y in [forward(lat, lon, -71.0, 0.0, mpf(0), mpf(0))]
        ],
    }
    json.dump(fixtures, sys.stdout, indent=2)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
