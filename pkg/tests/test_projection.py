import json
from pathlib import Path

import numpy as np
import pytest

from nutricast.errors import NonFiniteInput, OutOfDomain
from nutricast.projection import inverse_aps, inverse_many, project_aps, project_many

FIXTURES = json.loads(
    (Path(__file__).parent / "fixtures" / "aps_oracle.json").read_text()
)


def test_pole_maps_to_origin():
    p = project_aps(-90.0, 0.0)
    assert p.x == 0.0 and p.y == 0.0
    # longitude at the pole is arbitrary; any value must land on the origin
    p = project_aps(-90.0, 137.0)
    assert abs(p.x) < 1e-9 and abs(p.y) < 1e-9


def test_forward_matches_committed_oracle():
    # fixture points were generated once by tools/make_projection_fixtures.py
    # (see the provenance note inside the fixture file)
    for point in FIXTURES["points"]:
        got = project_aps(point["lat"], point["lon"])
        assert abs(got.x - point["x"]) < 0.5, point
        assert abs(got.y - point["y"]) < 0.5, point


def test_forward_oracle_agreement_is_tight():
    # double precision should track the 50-digit oracle far below the 0.5 m gate
    for point in FIXTURES["points"]:
        got = project_aps(point["lat"], point["lon"])
        assert abs(got.x - point["x"]) < 1e-6
        assert abs(got.y - point["y"]) < 1e-6


def test_standard_parallel_point_pinned():
    # (-71, 0) sits on the standard parallel: x = 0 by symmetry, |y| pinned
    oracle = next(p for p in FIXTURES["points"] if p["lat"] == -71.0 and p["lon"] == 0.0)
    got = project_aps(-71.0, 0.0)
    assert got.x == 0.0
    assert got.y == pytest.approx(oracle["y"], abs=1e-6)


def test_longitude_mirror_symmetry():
    east = project_aps(-60.0, 45.0)
    west = project_aps(-60.0, -45.0)
    assert abs(east.x + west.x) < 1e-9
    assert abs(east.y - west.y) < 1e-9


def test_round_trip_1000_random_points():
    rng = np.random.default_rng(42)
    lats = rng.uniform(-89.9, -45.0, 1000)
    lons = rng.uniform(-180.0, 180.0, 1000)
    x, y = project_many(lats, lons)
    back_lat, back_lon = inverse_many(x, y)
    assert np.max(np.abs(back_lat - lats)) < 1e-9
    assert np.max(np.abs(back_lon - lons)) < 1e-9


def test_inverse_of_oracle_coordinates():
    oracle = next(p for p in FIXTURES["points"] if p["lat"] == -71.0 and p["lon"] == 0.0)
    lat, lon = inverse_aps(oracle["x"], oracle["y"])
    assert lat == pytest.approx(-71.0, abs=1e-9)
    assert lon == pytest.approx(0.0, abs=1e-9)


def test_inverse_pole_convention():
    lat, lon = inverse_aps(0.0, 0.0)
    assert lat == -90.0
    assert lon == 0.0


def test_single_round_trip():
    p = project_aps(-60.0, 120.0)
    lat, lon = inverse_aps(p.x, p.y)
    assert lat == pytest.approx(-60.0, abs=1e-9)
    assert lon == pytest.approx(120.0, abs=1e-9)


def test_rejects_northern_hemisphere():
    with pytest.raises(OutOfDomain):
        project_aps(0.0, 10.0)
    with pytest.raises(OutOfDomain):
        project_aps(45.0, 10.0)


def test_rejects_nonfinite():
    with pytest.raises(OutOfDomain):
        project_aps(float("nan"), 0.0)
    with pytest.raises(OutOfDomain):
        project_aps(-60.0, float("inf"))
    with pytest.raises(NonFiniteInput):
        inverse_aps(float("nan"), 0.0)


def test_rejects_bad_longitude():
    with pytest.raises(OutOfDomain):
        project_aps(-60.0, 181.0)
