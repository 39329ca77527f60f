import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spacer_ga.encoding import Axis, GridPoint, SearchGrid
from spacer_ga.errors import BudgetError, DataError
from spacer_ga.landscapes import (
    CountingLandscape,
    TabulatedLandscape,
    brute_force,
    export_csv,
    load_csv,
    local_maxima,
    make_constant,
    make_reference_2d,
    make_reference_moox,
    make_reference_zno,
)


def test_reference_zno_confirmed():
    grid, land = make_reference_zno()
    sweep = brute_force(land)
    assert sweep.simulation_count == 81
    assert [grid.thickness(p) for p in sweep.argmax_points] == [{"ZnO": 30}]
    peaks = local_maxima(sweep.values, grid.shape)
    assert len(peaks) >= 3
    near = max(i for i in peaks if i < 30)
    assert 20 <= near <= 27
    assert 0 < sweep.values[30] - sweep.values[near] <= 0.1


def test_reference_moox_confirmed():
    grid, land = make_reference_moox()
    sweep = brute_force(land)
    assert sweep.simulation_count == 31
    assert [grid.thickness(p) for p in sweep.argmax_points] == [{"MoOx": 8}]
    assert len(local_maxima(sweep.values, grid.shape)) >= 2


def test_reference_2d_confirmed():
    grid, land = make_reference_2d()
    sweep = brute_force(land)
    assert sweep.simulation_count == 2511
    assert [grid.thickness(p) for p in sweep.argmax_points] == [{"ZnO": 24, "MoOx": 8}]
    assert len(local_maxima(sweep.values, grid.shape)) >= 5


def test_2d_amplitude_is_smallest_integer():
    from spacer_ga.landscapes import SyntheticLandscape, two_layer_profile

    grid, _ = make_reference_2d()
    below = brute_force(SyntheticLandscape(grid, two_layer_profile, {"amplitude": 143.0}))
    assert grid.thickness(below.argmax_points[0]) != {"ZnO": 24, "MoOx": 8}


def test_local_maxima_scan_against_loop():
    values = np.random.default_rng(0).random(7 * 5)
    shape = (7, 5)
    v = values.reshape(shape)
    expected = []
    for i in range(7):
        for j in range(5):
            nbrs = [v[a, b] for a, b in ((i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)) if 0 <= a < 7 and 0 <= b < 5]
            if all(v[i, j] > x for x in nbrs):
                expected.append(i * 5 + j)
    assert local_maxima(values, shape) == expected


def test_constant_landscape_all_ties():
    grid = SearchGrid((Axis("a", 0, 4), Axis("b", 0, 10, 5)))
    sweep = brute_force(make_constant(grid, 3.0))
    assert sweep.argmax_points == list(grid)


def test_sweep_touches_every_point_once():
    grid, land = make_reference_2d()
    counter = CountingLandscape(land)
    brute_force(counter)
    assert counter.calls == 2511
    assert np.all(counter.counts == 1)


@settings(max_examples=30)
@given(st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_simulation_count_is_product(points):
    grid = SearchGrid(tuple(Axis(f"L{i}", 0, n - 1) for i, n in enumerate(points)))
    assert brute_force(make_constant(grid)).simulation_count == int(np.prod(points))


def test_sweep_cap():
    grid, land = make_reference_2d()
    with pytest.raises(BudgetError, match="2511"):
        brute_force(land, cap=2000)


def test_purity():
    grid, land = make_reference_2d()
    p = GridPoint((24, 8))
    assert land.eval(p) == land.eval(p)
    assert np.array_equal(land.table(), land.table())


# -- CSV -----------------------------------------------------------------------


def test_minimal_csv():
    land = load_csv(io.BytesIO(b"t,fitness\n0,1.5\n1,2.5\n"))
    assert land.grid.total_points == 2
    assert land.eval(GridPoint((0,))) == 1.5
    assert land.eval(GridPoint((1,))) == 2.5


def test_csv_row_order_irrelevant_and_step_inferred():
    land = load_csv(io.StringIO("ZnO,MoOx,fitness\n10,5,4\n0,5,2\n0,0,1\n10,0,3\n"))
    assert land.grid.axes == (Axis("ZnO", 0, 10, 10), Axis("MoOx", 0, 5, 5))
    assert land.values.tolist() == [1, 2, 3, 4]


def test_csv_duplicate_row():
    text = "ZnO,MoOx,fitness\n0,0,1\n0,5,2\n10,0,3\n10,5,4\n10,5,5\n"
    with pytest.raises(DataError, match=r"row 6: duplicate point \(ZnO=10, MoOx=5\)"):
        load_csv(io.StringIO(text))


@pytest.mark.parametrize(
    "text, match",
    [
        ("t,fitness\n0,1\n1,2\n3,3\n", "not uniformly spaced"),
        ("t,fitness\n0,1\n1,abc\n", "row 3: non-numeric"),
        ("t,fitness\n0,1\n1,nan\n", "row 3: fitness must be finite"),
        ("a,b,fitness\n0,0,1\n0,1,1\n1,0,1\n", "missing"),
        ("t,value\n0,1\n", "header"),
        ("t,fitness\n0.5,1\n", "integer"),
        ("t,fitness\n", "no data rows"),
        ("", "empty"),
        ("t,fitness\n0,1,2\n", "row 2: expected 2 fields"),
    ],
)
def test_csv_errors(text, match):
    with pytest.raises(DataError, match=match):
        load_csv(io.StringIO(text))


def test_csv_round_trip_reference():
    grid, land = make_reference_2d()
    text = export_csv(land)
    assert text.count("\n") == 2512
    again = load_csv(io.StringIO(text))
    assert again.grid == grid
    assert np.array_equal(again.values, land.table())
    assert export_csv(again) == text
    assert brute_force(again).simulation_count == 2511


@settings(max_examples=25)
@given(st.integers(1, 6), st.integers(1, 4), st.integers(1, 3), st.data())
def test_csv_round_trip_property(n1, n2, step, data):
    grid = SearchGrid((Axis("x", 5, 5 + (n1 - 1) * step, step), Axis("y", 0, n2 - 1)))
    values = data.draw(st.lists(st.floats(-1e9, 1e9, allow_nan=False), min_size=n1 * n2, max_size=n1 * n2))
    land = TabulatedLandscape(grid, np.array(values))
    again = load_csv(io.StringIO(export_csv(land)))
    assert again.grid == grid
    assert np.array_equal(again.values, land.values)


def test_tabulated_rejects_wrong_length():
    with pytest.raises(DataError):
        TabulatedLandscape(SearchGrid((Axis("t", 0, 3),)), np.zeros(3))
