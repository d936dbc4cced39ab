#!/usr/bin/env python3
"""
Test script for rolling forecasts
Tests window arithmetic, look-ahead safety and the forecast CSV
"""

import sys
import os
import tempfile
import traceback
from dataclasses import replace
from datetime import date, timedelta

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from asymvol.config.exceptions import DataError, InsufficientDataError, ParseError, ValidationError
from asymvol.services.features import MODEL_IDS, MODEL_SPECS, DesignMatrix
from asymvol.services.forecast import (
    FORECAST_HEADER, load_forecasts, read_forecasts, rolling_forecast, rolling_forecast_rows,
    rolling_forecast_suite, write_forecasts
)
from asymvol.services.models import FitOptions
from test_features import make_measures


def toy_design(y, x=None, day_index=None):
    n = len(y)
    x = np.arange(n, dtype=float) ** 1.5 if x is None else np.asarray(x, dtype=float)
    return DesignMatrix(
        model_id='toy',
        dates=[date(2020, 1, 1) + timedelta(days=i) for i in range(n)],
        X=np.column_stack([np.ones(n), x]),
        y=np.asarray(y, dtype=float),
        names=['c', 'alpha1'],
        regressor_names=['const', 'x'],
        day_index=day_index
    )


def test_window_three_matches_oracle():
    print("\n=== Testing Rolling Window ===")
    rng = np.random.default_rng(0)
    design = toy_design(rng.standard_normal(6), x=rng.standard_normal(6))
    records, skipped = rolling_forecast_rows(design, window=3)
    assert not skipped
    assert len(records) == 3
    for record, target in zip(records, (3, 4, 5)):
        X = design.X[target - 3:target]
        b = np.linalg.lstsq(X, design.y[target - 3:target], rcond=None)[0]
        assert record.predicted == pytest.approx(float(design.X[target] @ b), abs=1e-10)
        assert record.realized == design.y[target]
        assert record.date == design.dates[target]
        assert record.window_end == design.dates[target - 1]
    print(f"✓ {len(records)} forecasts match explicit refits")


def test_constant_target():
    records, _ = rolling_forecast_rows(toy_design(np.full(10, -9.0)), window=4)
    assert len(records) == 6
    for record in records:
        assert record.predicted == pytest.approx(-9.0, abs=1e-9)


def test_window_validation():
    design = toy_design(np.arange(5.0))
    with pytest.raises(InsufficientDataError):
        rolling_forecast_rows(design, window=5)
    with pytest.raises(InsufficientDataError):
        rolling_forecast_rows(design, window=2)
    with pytest.raises(ValidationError):
        rolling_forecast_rows(design, window=1)
    with pytest.raises(ValidationError):
        rolling_forecast_rows(design, window=3, unit='weeks')


def test_days_unit_follows_calendar_gaps():
    rng = np.random.default_rng(1)
    design = toy_design(rng.standard_normal(7), x=rng.standard_normal(7),
                        day_index=np.array([0, 1, 2, 4, 5, 6, 7]))
    records, skipped = rolling_forecast_rows(design, window=3, unit='days')
    # a three-day window across the missing day 3 holds only two rows
    assert [s[0] for s in skipped] == design.dates[3:6]
    assert [r.date for r in records] == design.dates[6:]
    assert records[0].window_start == design.dates[3]


def test_days_unit_equals_rows_without_gaps():
    measures = make_measures(80, seed=21)
    spec = MODEL_SPECS['HAR-J']
    by_rows = rolling_forecast(measures, spec, window=40, unit='rows')
    by_days = rolling_forecast(measures, spec, window=40, unit='days')
    assert [r.date for r in by_rows] == [r.date for r in by_days]
    np.testing.assert_allclose([r.predicted for r in by_rows], [r.predicted for r in by_days])


def test_forecast_count():
    measures = make_measures(1005 + 23, seed=22)
    panel = rolling_forecast_suite(measures, window=1000)
    assert panel.model_ids == list(MODEL_IDS)
    assert len(panel.dates()) == 5
    for model_id in panel.model_ids:
        assert [r.date for r in panel[model_id]] == panel.dates()
    assert panel.dates()[-1] == measures[-1].date
    print(f"✓ 1005 rows with window 1000 give {len(panel.dates())} forecasts per model")


def test_no_look_ahead():
    measures = make_measures(150, seed=23)
    spec = MODEL_SPECS['RSV-AJ-LE']
    base = rolling_forecast(measures, spec, window=60)
    shocked = list(measures)
    shocked[-1] = replace(measures[-1], rv=measures[-1].rv * 1e3, ret=0.5)
    moved = rolling_forecast(shocked, spec, window=60)
    np.testing.assert_array_equal([r.predicted for r in base], [r.predicted for r in moved])
    assert moved[-1].realized != base[-1].realized
    assert [r.realized for r in base[:-1]] == [r.realized for r in moved[:-1]]


def test_every_window_row_moves_the_forecast():
    """A forecast depends on every row of its window and on nothing else before it"""
    rng = np.random.default_rng(5)
    n, window = 14, 5
    y, x = rng.standard_normal(n), rng.standard_normal(n)
    base, _ = rolling_forecast_rows(toy_design(y, x=x), window=window)

    def moved_by(y2, x2):
        moved, _ = rolling_forecast_rows(toy_design(y2, x=x2), window=window)
        return [abs(a.predicted - b.predicted) > 1e-9 for a, b in zip(moved, base)]

    for row in range(n):
        y2 = y.copy()
        y2[row] += 1.0
        x2 = x.copy()
        x2[row] += 1.0
        targets = range(window, n)
        # targets inside the fit window only
        assert moved_by(y2, x) == [t - window <= row < t for t in targets], row
        # regressor rows also enter through the target row itself
        assert moved_by(y, x2) == [t - window <= row <= t for t in targets], row



def test_forecast_file():
    measures = make_measures(200, seed=24)
    panel = rolling_forecast_suite(measures, window=120, options=FitOptions(threads=2))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'forecasts.csv')
        write_forecasts(path, panel)
        with open(path) as f:
            lines = f.read().splitlines()
        assert lines[0].startswith('#')
        assert lines[1] == FORECAST_HEADER
        first_date = lines[2].split(',')[0]
        assert [line.split(',')[1] for line in lines[2:10]] == list(MODEL_IDS)
        assert all(line.split(',')[0] == first_date for line in lines[2:10])

        loaded = read_forecasts(path)
    assert loaded.model_ids == panel.model_ids
    for model_id in panel.model_ids:
        assert [r.predicted for r in loaded[model_id]] == [r.predicted for r in panel[model_id]]

def test_malformed_forecast_file_names_line():
    header = FORECAST_HEADER + '\n'
    with pytest.raises(ParseError) as err:
        load_forecasts(header + '2020-01-02,HAR-J,-9.0,-9.5\nnotadate,HAR-J,-9.0,-9.5\n')
    assert err.value.line == 3 and 'date' in err.value.message
    with pytest.raises(ParseError) as err:
        load_forecasts('# forecasts\n' + header + '2020-01-02,HAR-J,-9.0,abc\n')
    assert err.value.line == 3 and 'realized_lnrv' in err.value.message
    with pytest.raises(DataError):
        load_forecasts('date,model\n2020-01-02,HAR-J\n')

    panel = load_forecasts(header + '2020-01-03,HAR-J,-9.0,-inf\n2020-01-02,HAR-J,-8.0,-9.5\n')
    assert [r.date for r in panel['HAR-J']] == [date(2020, 1, 2), date(2020, 1, 3)]
    assert panel['HAR-J'][1].realized == -np.inf



TESTS = [
    ("Window Oracle", test_window_three_matches_oracle),
    ("Constant Target", test_constant_target),
    ("Window Validation", test_window_validation),
    ("Calendar Windows", test_days_unit_follows_calendar_gaps),
    ("Rows vs Days", test_days_unit_equals_rows_without_gaps),
    ("Forecast Count", test_forecast_count),
    ("No Look-Ahead", test_no_look_ahead),
    ("Window Dependence", test_every_window_row_moves_the_forecast),
    ("Forecast File", test_forecast_file),
    ("Malformed Forecast File", test_malformed_forecast_file_names_line),
]


def main():
    print("=" * 60)
    print("Forecast Test Suite")
    print("=" * 60)

    results = []
    for name, test in TESTS:
        try:
            test()
            results.append((name, True))
        except Exception as e:
            print(f"✗ {name} failed: {e}")
            traceback.print_exc()
            results.append((name, False))

    print("\n" + "=" * 60)
    print("Test Summary")
    print("=" * 60)
    for test_name, passed in results:
        status = "✓ PASS" if passed else "✗ FAIL"
        print(f"{status}: {test_name}")

    all_passed = all(result[1] for result in results)
    print("\n" + ("All tests passed!" if all_passed else "Some tests failed"))

    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
