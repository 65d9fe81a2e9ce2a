from __future__ import annotations

import json
import math
from datetime import date, timedelta

import numpy as np
import pytest

from slego.errors import SlegoError
from slego.services.builtins import (
    compute_return,
    fill_missing_values,
    fit_linear_model,
    import_csv_fixture,
    plot_series,
    predict_and_score,
    split_dataset,
)


def put_csv(ws, rel, header, rows):
    lines = [header] + [",".join(str(c) for c in r) for r in rows]
    ws.put_file(rel, ("\n".join(lines) + "\n").encode())


def read_csv_cells(ws, rel):
    import csv
    import io

    rows = list(csv.reader(io.StringIO(ws.read_file(rel).decode())))
    return rows[0], rows[1:]


def plot_spec(ws, rel):
    html = ws.read_file(rel).decode()
    return json.loads(html.split('id="plot-spec">', 1)[1].split("</script>", 1)[0])


# ---------------------------------------------------------------------------
# import_csv_fixture
# ---------------------------------------------------------------------------


class TestImport:
    def _daily_fixture(self, ws):
        rows = [
            ((date(2023, 1, 1) + timedelta(days=i)).isoformat(), 100 + i)
            for i in range(365)
        ]
        put_csv(ws, "fixtures/daily.csv", "Date,Close", rows)
        return rows

    def test_no_bounds_copies_all(self, platform):
        rows = self._daily_fixture(platform.ws)
        n = import_csv_fixture(platform.ws, "fixtures/daily.csv", "dataspace/out.csv")
        assert n == len(rows)

    def test_bounds_covering_everything(self, platform):
        rows = self._daily_fixture(platform.ws)
        n = import_csv_fixture(
            platform.ws, "fixtures/daily.csv", "dataspace/out.csv",
            start_date="2023-01-01", end_date="2023-12-31",
        )
        assert n == len(rows)

    def test_start_date_filter_matches_calendar(self, platform):
        self._daily_fixture(platform.ws)
        n = import_csv_fixture(
            platform.ws, "fixtures/daily.csv", "dataspace/out.csv", start_date="2023-07-01"
        )
        # calendar oracle: days from 2023-07-01 through 2023-12-31 inclusive
        oracle = (date(2023, 12, 31) - date(2023, 7, 1)).days + 1
        assert n == oracle == 184

    def test_ticker_selects_directory_entry(self, platform):
        put_csv(platform.ws, "fixtures/md/MSFT.csv", "Date,Close", [("2023-01-01", 1)])
        n = import_csv_fixture(
            platform.ws, "fixtures/md", "dataspace/out.csv", ticker="msft"
        )
        assert n == 1

    def test_missing_source(self, platform):
        with pytest.raises(SlegoError) as e:
            import_csv_fixture(platform.ws, "fixtures/nope.csv", "dataspace/out.csv")
        assert e.value.code == "E_SOURCE_MISSING"

    def test_no_date_column(self, platform):
        put_csv(platform.ws, "fixtures/x.csv", "A,B", [(1, 2)])
        with pytest.raises(SlegoError) as e:
            import_csv_fixture(platform.ws, "fixtures/x.csv", "dataspace/out.csv", start_date="2023-01-01")
        assert e.value.code == "E_NO_DATE_COLUMN"

    def test_empty_result(self, platform):
        self._daily_fixture(platform.ws)
        with pytest.raises(SlegoError) as e:
            import_csv_fixture(platform.ws, "fixtures/daily.csv", "dataspace/out.csv", start_date="2030-01-01")
        assert e.value.code == "E_EMPTY_RESULT"


# ---------------------------------------------------------------------------
# fill_missing_values
# ---------------------------------------------------------------------------


class TestFill:
    def test_ffill(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "V", [(1,), ("",), (3,)])
        fill_missing_values(platform.ws, "dataspace/in.csv", "dataspace/out.csv", "ffill")
        _, rows = read_csv_cells(platform.ws, "dataspace/out.csv")
        assert [r[0] for r in rows] == ["1", "1", "3"]

    def test_bfill_hand_trace(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "V", [("",), (2,), ("",)])
        fill_missing_values(platform.ws, "dataspace/in.csv", "dataspace/out.csv", "bfill")
        _, rows = read_csv_cells(platform.ws, "dataspace/out.csv")
        assert [r[0] for r in rows] == ["2", "2", ""]

    def test_zero_and_drop(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "A,B", [(1, ""), ("", 2), (3, 4)])
        fill_missing_values(platform.ws, "dataspace/in.csv", "dataspace/z.csv", "zero")
        _, rows = read_csv_cells(platform.ws, "dataspace/z.csv")
        assert rows == [["1", "0"], ["0", "2"], ["3", "4"]]
        n = fill_missing_values(platform.ws, "dataspace/in.csv", "dataspace/d.csv", "drop")
        assert n == 1

    def test_identity_when_complete(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "A,B", [(1, 2), (3, 4)])
        for strategy in ("ffill", "bfill", "zero", "drop"):
            fill_missing_values(platform.ws, "dataspace/in.csv", "dataspace/out.csv", strategy)
            assert read_csv_cells(platform.ws, "dataspace/out.csv") == (
                ["A", "B"], [["1", "2"], ["3", "4"]]
            )

    def test_bad_strategy(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "A", [(1,)])
        with pytest.raises(SlegoError) as e:
            fill_missing_values(platform.ws, "dataspace/in.csv", "dataspace/out.csv", "median")
        assert e.value.code == "E_BAD_STRATEGY"


# ---------------------------------------------------------------------------
# compute_return
# ---------------------------------------------------------------------------


def return_oracle(values, w):
    """Independent per-row percent-change oracle."""
    out = []
    for t, v in enumerate(values):
        if t < w or math.isnan(v) or math.isnan(values[t - w]):
            out.append(float("nan"))
        else:
            out.append(v / values[t - w] - 1.0)
    return out


class TestComputeReturn:
    def test_two_rows_window_one(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "Close", [(100,), (110,)])
        n = compute_return(platform.ws, "dataspace/in.csv", "dataspace/out.csv", window_size=1)
        assert n == 1
        _, rows = read_csv_cells(platform.ws, "dataspace/out.csv")
        assert float(rows[0][-1]) == pytest.approx(110 / 100 - 1, abs=1e-15)

    def test_constant_series(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "Close", [(5,)] * 4)
        n = compute_return(platform.ws, "dataspace/in.csv", "dataspace/out.csv", window_size=2)
        assert n == 2
        _, rows = read_csv_cells(platform.ws, "dataspace/out.csv")
        assert all(float(r[-1]) == 0.0 for r in rows)

    def test_matches_oracle_random_walk(self, platform):
        rng = np.random.default_rng(3)
        closes = [float(c) for c in 100 * np.exp(np.cumsum(rng.normal(0, 0.02, 100)))]
        put_csv(platform.ws, "dataspace/in.csv", "Close", [(repr(c),) for c in closes])
        compute_return(platform.ws, "dataspace/in.csv", "dataspace/out.csv",
                       window_size=20, keep_rows=True)
        _, rows = read_csv_cells(platform.ws, "dataspace/out.csv")
        got = [float(r[-1]) if r[-1] else float("nan") for r in rows]
        expected = return_oracle(closes, 20)
        for g, e in zip(got, expected):
            if math.isnan(e):
                assert math.isnan(g)
            else:
                assert abs(g - e) <= 1e-12

    def test_errors(self, platform):
        with pytest.raises(SlegoError) as e:
            compute_return(platform.ws, "dataspace/nope.csv", "dataspace/out.csv")
        assert e.value.code == "E_INPUT_MISSING"
        put_csv(platform.ws, "dataspace/in.csv", "Close", [(1,), (2,)])
        with pytest.raises(SlegoError) as e:
            compute_return(platform.ws, "dataspace/in.csv", "dataspace/out.csv", window_size=0)
        assert e.value.code == "E_BAD_WINDOW"
        with pytest.raises(SlegoError) as e:
            compute_return(platform.ws, "dataspace/in.csv", "dataspace/out.csv", target_column_name="Open")
        assert e.value.code == "E_NO_COLUMN"
        with pytest.raises(SlegoError) as e:
            compute_return(platform.ws, "dataspace/in.csv", "dataspace/out.csv", window_size=5)
        assert e.value.code == "E_EMPTY_RESULT"


# ---------------------------------------------------------------------------
# plot_series
# ---------------------------------------------------------------------------


class TestPlot:
    def test_spec_point_count(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "X,Y", [(1, 10), (2, 20), (3, 30)])
        plot_series(platform.ws, "dataspace/in.csv", "X", "Y", "dataspace/p.html")
        spec = plot_spec(platform.ws, "dataspace/p.html")
        assert len(spec["x"]) == len(spec["y"]) == 3
        assert spec["title"] == "Data Plot"

    def test_constant_series_collapses(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "X,Y", [(1, 7), (2, 7), (3, 7)])
        plot_series(platform.ws, "dataspace/in.csv", "X", "Y", "dataspace/p.html")
        html = platform.ws.read_file("dataspace/p.html").decode()
        points = html.split('points="', 1)[1].split('"', 1)[0].split()
        ys = {p.split(",")[1] for p in points}
        assert len(ys) == 1

    def test_spec_preserves_column_precision(self, platform):
        ys = [0.123456789012345, -0.000012345678901, 1.5e-7]
        put_csv(platform.ws, "dataspace/in.csv", "X,Y", [(i, repr(y)) for i, y in enumerate(ys)])
        plot_series(platform.ws, "dataspace/in.csv", "X", "Y", "dataspace/p.html")
        spec = plot_spec(platform.ws, "dataspace/p.html")
        assert spec["y"] == ys

    def test_missing_column(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "X,Y", [(1, 2)])
        with pytest.raises(SlegoError) as e:
            plot_series(platform.ws, "dataspace/in.csv", "X", "Z", "dataspace/p.html")
        assert e.value.code == "E_NO_COLUMN"


# ---------------------------------------------------------------------------
# split_dataset
# ---------------------------------------------------------------------------


class TestSplit:
    @pytest.mark.parametrize("n,f,train", [(10, 0.8, 8), (2, 0.5, 1), (17, 0.8, 13)])
    def test_floor_arithmetic(self, platform, n, f, train):
        put_csv(platform.ws, "dataspace/in.csv", "V", [(i,) for i in range(n)])
        out = split_dataset(platform.ws, "dataspace/in.csv", "dataspace/tr.csv", "dataspace/te.csv", f)
        assert out == {"train_rows": train, "test_rows": n - train}

    def test_concatenation_preserves_order(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "V", [(i,) for i in range(11)])
        split_dataset(platform.ws, "dataspace/in.csv", "dataspace/tr.csv", "dataspace/te.csv", 0.6)
        _, tr = read_csv_cells(platform.ws, "dataspace/tr.csv")
        _, te = read_csv_cells(platform.ws, "dataspace/te.csv")
        assert [r[0] for r in tr + te] == [str(i) for i in range(11)]

    def test_errors(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "V", [(1,)])
        with pytest.raises(SlegoError) as e:
            split_dataset(platform.ws, "dataspace/in.csv", "dataspace/a.csv", "dataspace/b.csv", 0.5)
        assert e.value.code == "E_TOO_FEW_ROWS"
        put_csv(platform.ws, "dataspace/in.csv", "V", [(1,), (2,)])
        with pytest.raises(SlegoError) as e:
            split_dataset(platform.ws, "dataspace/in.csv", "dataspace/a.csv", "dataspace/b.csv", 1.0)
        assert e.value.code == "E_BAD_FRACTION"


# ---------------------------------------------------------------------------
# fit_linear_model / predict_and_score
# ---------------------------------------------------------------------------


class TestLinearModel:
    def test_exact_line(self, platform):
        rows = [(x, 2 * x + 1) for x in range(50)]
        put_csv(platform.ws, "dataspace/in.csv", "x,y", rows)
        model = fit_linear_model(platform.ws, "dataspace/in.csv", "y", "x", "dataspace/m.json")
        assert model["intercept"] == pytest.approx(1.0, abs=1e-9)
        assert model["coefficients"]["x"] == pytest.approx(2.0, abs=1e-9)

    def test_constant_target(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "x,y", [(x, 7) for x in range(10)])
        model = fit_linear_model(platform.ws, "dataspace/in.csv", "y", "x", "dataspace/m.json")
        assert model["intercept"] == pytest.approx(7.0, abs=1e-9)
        assert model["coefficients"]["x"] == pytest.approx(0.0, abs=1e-9)

    def test_two_feature_recovery(self, platform):
        rng = np.random.default_rng(5)
        a = [float(v) for v in rng.uniform(-2, 2, 60)]
        b = [float(v) for v in rng.uniform(-2, 2, 60)]
        y = [3.0 * ai - 0.5 * bi + 4.0 for ai, bi in zip(a, b)]
        rows = list(zip(map(repr, a), map(repr, b), map(repr, y)))
        put_csv(platform.ws, "dataspace/in.csv", "a,b,y", rows)
        model = fit_linear_model(platform.ws, "dataspace/in.csv", "y", "a,b", "dataspace/m.json")
        assert model["coefficients"]["a"] == pytest.approx(3.0, abs=1e-8)
        assert model["coefficients"]["b"] == pytest.approx(-0.5, abs=1e-8)
        assert model["intercept"] == pytest.approx(4.0, abs=1e-8)

    def test_underdetermined(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "a,y", [(1, 2)])
        with pytest.raises(SlegoError) as e:
            fit_linear_model(platform.ws, "dataspace/in.csv", "y", "a", "dataspace/m.json")
        assert e.value.code == "E_UNDERDETERMINED"

    def test_non_numeric(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "a,y", [("u", 1), (2, 3)])
        with pytest.raises(SlegoError) as e:
            fit_linear_model(platform.ws, "dataspace/in.csv", "y", "a", "dataspace/m.json")
        assert e.value.code == "E_NON_NUMERIC"


def read_metrics(ws, rel):
    lines = ws.read_file(rel).decode().strip().splitlines()
    assert [l.split("=")[0] for l in lines] == ["mae", "rmse", "r2"]
    return {l.split("=")[0]: float(l.split("=")[1]) for l in lines}


class TestPredictAndScore:
    def _model(self, platform, intercept, coef):
        platform.ws.put_file(
            "dataspace/m.json",
            json.dumps(
                {
                    "intercept": intercept,
                    "coefficients": {"x": coef},
                    "feature_columns": ["x"],
                    "target_column": "y",
                }
            ).encode(),
        )

    def test_perfect_model(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "x,y", [(x, 2 * x + 1) for x in range(10)])
        self._model(platform, 1.0, 2.0)
        m = predict_and_score(platform.ws, "dataspace/m.json", "dataspace/in.csv",
                              "dataspace/p.csv", "dataspace/metrics.txt")
        assert m["mae"] == 0.0 and m["rmse"] == 0.0 and m["r2"] == 1.0
        header, rows = read_csv_cells(platform.ws, "dataspace/p.csv")
        assert header[-1] == "Predicted" and len(rows) == 10

    def test_constant_predictor_r2_zero(self, platform):
        ys = [1.0, 2.0, 3.0, 6.0]
        put_csv(platform.ws, "dataspace/in.csv", "x,y", [(0, y) for y in ys])
        self._model(platform, sum(ys) / len(ys), 0.0)
        m = predict_and_score(platform.ws, "dataspace/m.json", "dataspace/in.csv",
                              "dataspace/p.csv", "dataspace/metrics.txt")
        assert abs(m["r2"]) <= 1e-12

    def test_known_residuals(self, platform):
        # residuals [1, -1, 1, -1] around predictions of 0 -> mae = rmse = 1
        put_csv(platform.ws, "dataspace/in.csv", "x,y", [(0, 1), (0, -1), (0, 1), (0, -1)])
        self._model(platform, 0.0, 0.0)
        m = predict_and_score(platform.ws, "dataspace/m.json", "dataspace/in.csv",
                              "dataspace/p.csv", "dataspace/metrics.txt")
        assert m["mae"] == 1.0 and m["rmse"] == 1.0
        assert read_metrics(platform.ws, "dataspace/metrics.txt") == m

    def test_zero_variance_target_with_perfect_fit(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "x,y", [(0, 7), (1, 7)])
        self._model(platform, 7.0, 0.0)
        m = predict_and_score(platform.ws, "dataspace/m.json", "dataspace/in.csv",
                              "dataspace/p.csv", "dataspace/metrics.txt")
        assert m["r2"] == 1.0

    def test_missing_model(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "x,y", [(0, 1)])
        with pytest.raises(SlegoError) as e:
            predict_and_score(platform.ws, "dataspace/nope.json", "dataspace/in.csv",
                              "dataspace/p.csv", "dataspace/metrics.txt")
        assert e.value.code == "E_MODEL_MISSING"


class TestDeterminism:
    def test_repeat_invocations_byte_identical(self, platform):
        put_csv(platform.ws, "dataspace/in.csv", "Close", [(100 + i,) for i in range(30)])
        compute_return(platform.ws, "dataspace/in.csv", "dataspace/a.csv", window_size=5)
        first = platform.ws.read_file("dataspace/a.csv")
        compute_return(platform.ws, "dataspace/in.csv", "dataspace/a.csv", window_size=5)
        assert platform.ws.read_file("dataspace/a.csv") == first
