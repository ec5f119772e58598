import io

import numpy as np
import pytest

from nutricast.errors import (
    BadCell,
    EmptyAfterFiltering,
    GridMismatch,
    StandardizerMismatch,
)
from nutricast.external import (
    ExternalRow,
    diff_grids,
    grid_bin_mean,
    parse_external_table,
    predict_external_table,
)
from nutricast.features import Standardizer
from nutricast.network import MlpConfig, init_mlp


def fitted_standardizer(seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(50, 7)) * [1e6, 1e6, 400, 4, 0.5, 40, 8] + [0, 0, 700, 5, 34, 270, 24]
    return Standardizer().fit(X)


def ext_row(row_id=0, **kw):
    base = dict(latitude=-60.0, longitude=10.0, pressure=None, temperature=2.0,
                salinity=34.3, oxygen=280.0, nitrate=22.0)
    base.update(kw)
    return ExternalRow(row_id=row_id, **base)


def pinned_model(standardizer):
    model = init_mlp(MlpConfig(dropout_p=0.2), seed=1)
    model.standardizer_hash = standardizer.state_hash()
    return model


def test_parse_external_table_surface_style():
    text = (
        "latitude,longitude,temperature,salinity,oxygen,nitrate,phosphate,silicate,source\n"
        "-60.0,10.0,2.0,34.3,280.0,22.0,1.9,55.0,esm\n"
        "-65.0,-120.0,0.5,34.0,300.0,-999,2.1,80.0,esm\n"
    )
    rows = parse_external_table(io.StringIO(text))
    assert len(rows) == 2
    assert rows[0].pressure is None
    assert rows[0].phosphate_ref == 1.9
    assert rows[1].nitrate is None
    assert rows[0].source == "esm"


def test_missing_pressure_gets_surface_default():
    s = fitted_standardizer()
    model = pinned_model(s)
    implicit = predict_external_table(model, s, [ext_row()], n_samples=20, seed=5)
    explicit = predict_external_table(
        model, s, [ext_row(pressure=5.0)], n_samples=20, seed=5
    )
    assert implicit.summaries == explicit.summaries
    assert implicit.surface_pressure == 5.0


def test_missing_input_dropped_and_counted():
    s = fitted_standardizer()
    model = pinned_model(s)
    rows = [ext_row(row_id=0), ext_row(row_id=1, nitrate=None), ext_row(row_id=2)]
    result = predict_external_table(model, s, rows, n_samples=10, seed=5)
    assert len(result.rows) == 2
    assert result.n_dropped == 1
    assert result.dropped[0].index == 1
    assert "nitrate" in result.dropped[0].reason


def test_row_conservation():
    s = fitted_standardizer()
    model = pinned_model(s)
    rows = [
        ext_row(row_id=0),
        ext_row(row_id=1, oxygen=None),
        ext_row(row_id=2, latitude=-30.0),
        ext_row(row_id=3),
    ]
    result = predict_external_table(model, s, rows, n_samples=10, seed=5)
    assert len(result.rows) + result.n_dropped == len(rows)


def test_north_of_cut_dropped():
    s = fitted_standardizer()
    model = pinned_model(s)
    rows = [ext_row(row_id=0, latitude=-44.9), ext_row(row_id=1, latitude=-45.0),
            ext_row(row_id=2, latitude=-45.1)]
    result = predict_external_table(model, s, rows, n_samples=10, seed=5)
    assert [r.row_id for r in result.rows] == [2]
    assert {d.index for d in result.dropped} == {0, 1}


def test_standardizer_mismatch():
    s = fitted_standardizer()
    model = pinned_model(s)
    other = fitted_standardizer(seed=9)
    with pytest.raises(StandardizerMismatch):
        predict_external_table(model, other, [ext_row()], n_samples=10)


def test_empty_after_filtering():
    s = fitted_standardizer()
    model = pinned_model(s)
    with pytest.raises(EmptyAfterFiltering):
        predict_external_table(model, s, [ext_row(latitude=-10.0)], n_samples=10)


def test_prediction_invariant_to_row_order():
    s = fitted_standardizer()
    model = pinned_model(s)
    rows = [ext_row(row_id=i, temperature=1.0 + 0.3 * i) for i in range(9)]
    fwd = predict_external_table(model, s, rows, n_samples=30, seed=21)
    rev = predict_external_table(model, s, rows[::-1], n_samples=30, seed=21)
    by_id_fwd = dict(zip((r.row_id for r in fwd.rows), fwd.summaries))
    by_id_rev = dict(zip((r.row_id for r in rev.rows), rev.summaries))
    assert by_id_fwd == by_id_rev


def test_grid_single_point():
    g = grid_bin_mean([(-60.5, 10.5, 3.0)], 1.0)
    assert g.cells == {(-61, 10): (3.0, 1)}
    assert g.center((-61, 10)) == (-60.5, 10.5)


def test_grid_two_points_one_cell():
    g = grid_bin_mean([(-60.2, 10.1, 1.0), (-60.8, 10.9, 3.0)], 1.0)
    assert g.cells == {(-61, 10): (2.0, 2)}


def test_grid_distinct_cells_never_average():
    g = grid_bin_mean([(-60.5, 10.5, 1.0), (-61.5, 10.5, 3.0)], 1.0)
    assert g.cells[(-61, 10)] == (1.0, 1)
    assert g.cells[(-62, 10)] == (3.0, 1)


def test_grid_weighted_mean_matches_global_mean():
    rng = np.random.default_rng(7)
    pts = [
        (float(lat), float(lon), float(v))
        for lat, lon, v in zip(
            rng.uniform(-75, -45, 500), rng.uniform(-180, 180, 500), rng.normal(size=500)
        )
    ]
    g = grid_bin_mean(pts, 5.0)
    global_mean = np.mean([v for _, _, v in pts])
    assert abs(g.weighted_mean() - global_mean) / abs(global_mean) < 1e-10


def test_grid_bad_cell():
    with pytest.raises(BadCell):
        grid_bin_mean([], 0.0)
    with pytest.raises(BadCell):
        grid_bin_mean([], (-1.0, 1.0))


def test_grid_longitude_wrap():
    g = grid_bin_mean([(-60.5, 180.0, 1.0)], 1.0)
    assert (-61, -180) in g.cells


def test_diff_identical_grids_is_zero():
    g = grid_bin_mean([(-60.5, 10.5, 2.0), (-61.5, 11.5, 4.0)], 1.0)
    d = diff_grids(g, g)
    assert set(d.cells) == set(g.cells)
    assert all(mean == 0.0 for mean, _ in d.cells.values())


def test_diff_intersection_rule():
    a = grid_bin_mean([(-60.5, 10.5, 3.0), (-61.5, 11.5, 9.9)], 1.0, variable="esm")
    b = grid_bin_mean([(-60.5, 10.5, 1.5), (-70.5, 0.5, 1.0)], 1.0, variable="nn")
    d = diff_grids(a, b)
    assert set(d.cells) == {(-61, 10)}
    assert d.cells[(-61, 10)][0] == pytest.approx(1.5)
    assert d.variable == "esm-nn"


def test_diff_count_is_min():
    a = grid_bin_mean([(-60.5, 10.5, 1.0), (-60.6, 10.6, 2.0)], 1.0)
    b = grid_bin_mean([(-60.5, 10.5, 1.0)], 1.0)
    d = diff_grids(a, b)
    assert d.cells[(-61, 10)][1] == 1


def test_diff_grid_mismatch():
    a = grid_bin_mean([(-60.5, 10.5, 1.0)], 1.0)
    b = grid_bin_mean([(-60.5, 10.5, 1.0)], 2.0)
    with pytest.raises(GridMismatch):
        diff_grids(a, b)
    c = grid_bin_mean([(-60.5, 10.5, 1.0)], 1.0, units="mol/kg")
    with pytest.raises(GridMismatch):
        diff_grids(a, c)
