"""Panel data ingestion, validation, and week grouping."""

import numpy as np
import pytest

from mrctest.data import (
    PanelDataset,
    group_city_weeks,
    load_csv,
    load_rainfall_csv,
    write_csv,
)
from mrctest.errors import (
    DomainError,
    ParseError,
    SchemaError,
    UnsupportedDesignError,
)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


BASIC = """id,t,y,x1,x2
a,1,0.0,0.5,1
a,2,1.5,0.5,2
a,3,2.5,0.5,3
b,1,0.0,-0.5,1
b,2,3.0,-0.5,2
b,3,0.7,-0.5,3
"""


def test_load_csv_basic(tmp_path):
    ds = load_csv(_write(tmp_path, BASIC), "y", "id", ["x1", "x2"], time_col="t")
    assert (ds.n, ds.N, ds.p) == (2, 6, 2)
    assert ds.subject_index == {"a": 1, "b": 2}
    assert ds.covariate_names == ("x1", "x2")
    assert np.array_equal(ds.y, [0.0, 1.5, 2.5, 0.0, 3.0, 0.7])
    obs = ds.observations
    assert obs[4].subject_id == "b" and obs[4].outcome == 3.0


def test_load_csv_missing_column(tmp_path):
    with pytest.raises(SchemaError, match="missing column"):
        load_csv(_write(tmp_path, BASIC), "y", "id", ["x1", "nope"])


def test_load_csv_negative_outcome(tmp_path):
    text = BASIC.replace("a,2,1.5", "a,2,-1.0")
    with pytest.raises(DomainError, match="non-negative"):
        load_csv(_write(tmp_path, text), "y", "id", ["x1", "x2"])


def test_load_csv_single_covariate_rejected(tmp_path):
    with pytest.raises(UnsupportedDesignError, match="p >= 2"):
        load_csv(_write(tmp_path, BASIC), "y", "id", ["x1"])


def test_load_csv_parse_error_carries_line(tmp_path):
    text = BASIC.replace("b,2,3.0", "b,2,oops")
    with pytest.raises(ParseError, match=":6:"):
        load_csv(_write(tmp_path, text), "y", "id", ["x1", "x2"])


def test_load_csv_na_rows_dropped(tmp_path):
    text = BASIC.replace("a,2,1.5,0.5,2", "a,2,NA,0.5,2").replace(
        "b,3,0.7,-0.5,3", "b,3,0.7,,3"
    )
    ds = load_csv(_write(tmp_path, text), "y", "id", ["x1", "x2"])
    assert ds.N == 4


def test_intercept_column_rejected():
    with pytest.raises(UnsupportedDesignError, match="all-ones"):
        PanelDataset.from_arrays(
            ["a", "b"], [1.0, 2.0], [[1.0, 0.3], [1.0, 0.4]]
        )


def test_constant_non_one_column_allowed():
    ds = PanelDataset.from_arrays(["a", "b"], [1.0, 2.0], [[2.0, 0.3], [2.0, 0.4]])
    assert ds.p == 2


def test_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(5)
    ids = [f"s{i}" for i in range(4) for _ in range(3)]
    y = np.abs(rng.normal(1.0, 0.7, 12))
    X = rng.normal(size=(12, 3)) * np.pi
    t = rng.normal(size=12)
    ds = PanelDataset.from_arrays(ids, y, X, time=t)
    path = tmp_path / "rt.csv"
    write_csv(ds, path)
    back = load_csv(path, "y", "id", list(ds.covariate_names), time_col="t")
    assert (back.n, back.N, back.p) == (ds.n, ds.N, ds.p)
    assert np.array_equal(back.y, ds.y)
    assert np.array_equal(back.X, ds.X)
    assert np.array_equal(back.time, ds.time)


def test_subject_index_bijection():
    ids = ["c", "a", "c", "b", "a"]
    ds = PanelDataset.from_arrays(ids, np.ones(5), np.arange(10.0).reshape(5, 2))
    vals = sorted(ds.subject_index.values())
    assert vals == list(range(1, ds.n + 1))
    assert ds.subject_index["c"] == 1  # indexed by first appearance
    codes = ds.subject_codes()
    assert np.array_equal(codes, [1, 2, 1, 3, 2])


def test_subset_preserves_rows():
    ids = ["a", "b", "a", "c"]
    ds = PanelDataset.from_arrays(ids, [1.0, 2, 3, 4], np.arange(8.0).reshape(4, 2))
    sub = ds.subset(["a", "c"])
    assert sub.subject_ids == ("a", "a", "c")
    assert np.array_equal(sub.y, [1.0, 3.0, 4.0])


def _daily(city, start_ord, days):
    rows = []
    for k in range(days):
        rows.append((city, float(start_ord + k)))
    return rows


def test_group_city_weeks_two_full_weeks():
    rows = _daily("van", 1000, 14)
    ids = [c for c, _ in rows]
    t = [d for _, d in rows]
    ds = PanelDataset.from_arrays(ids, np.ones(14), np.tile([0.0, 2.0], (14, 1)), time=t)
    wk = group_city_weeks(ds, week_len=7)
    sizes = {}
    for s in wk.subject_ids:
        sizes[s] = sizes.get(s, 0) + 1
    assert sorted(sizes.values()) == [7, 7]
    assert wk.n == 2


def test_group_city_weeks_incomplete_week_kept():
    # 7 days, then 4 of the next 7 missing
    days = list(range(1000, 1007)) + [1007, 1009, 1012]
    ds = PanelDataset.from_arrays(
        ["van"] * 10, np.ones(10), np.tile([0.0, 2.0], (10, 1)), time=[float(d) for d in days]
    )
    wk = group_city_weeks(ds, week_len=7)
    sizes = {}
    for s in wk.subject_ids:
        sizes[s] = sizes.get(s, 0) + 1
    assert sorted(sizes.values()) == [3, 7]


def test_group_city_weeks_empty():
    ds = PanelDataset.from_arrays([], np.empty(0), np.empty((0, 2)), time=np.empty(0))
    assert group_city_weeks(ds, 7).N == 0


def test_load_csv_date_time_column(tmp_path):
    text = (
        "city,date,rain,x1,x2\n"
        "van,2015-11-29,0.2,0,1\n"
        "van,2015.11.30,4.6,0,2\n"
        "nv,2015/12/01,8.0,1,3\n"
    )
    ds = load_csv(_write(tmp_path, text), "rain", "city", ["x1", "x2"], time_col="date")
    assert ds.time is not None
    assert ds.time[1] - ds.time[0] == 1.0
    assert ds.time[2] - ds.time[1] == 1.0


def test_load_rainfall_csv_builds_design(tmp_path):
    text = (
        "city,date,rain\n"
        "van,2015-11-29,0.2\n"
        "van,2015-06-14,0.0\n"
        "nv,2015-11-29,8.0\n"
        "nv,2015-06-14,NA\n"
    )
    ds = load_rainfall_csv(_write(tmp_path, text), "city", "date", "rain", city_one="nv")
    assert ds.N == 3  # NA row dropped
    assert ds.covariate_names == ("city", "season")
    assert np.array_equal(ds.X[:, 0], [0.0, 0.0, 1.0])
    assert np.array_equal(ds.X[:, 1], [1.0, 0.0, 1.0])  # Nov rainy, Jun not
    with pytest.raises(DomainError, match="city-one"):
        load_rainfall_csv(_write(tmp_path, text), "city", "date", "rain", city_one="xx")
