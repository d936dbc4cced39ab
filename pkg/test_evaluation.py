#!/usr/bin/env python3
"""
Test script for forecast evaluation
Tests the four losses and the Diebold-Mariano comparison grid
"""

import sys
import os
import math
import traceback
from datetime import date, timedelta

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import mpmath
import numpy as np
import pytest

from asymvol.config.exceptions import (
    DataError, IdenticalForecastsError, InsufficientDataError, UnpairedForecastsError
)
from asymvol.services.evaluation import (
    LOSS_KINDS, best_models, dm_matrix, dm_test, long_run_variance, loss_table, losses
)
from asymvol.services.features import MODEL_IDS
from asymvol.services.forecast import ForecastPanel, ForecastRecord

START = date(2015, 1, 1)


def make_records(model_id, predicted, realized, start=START):
    return [ForecastRecord(date=start + timedelta(days=i), model_id=model_id,
                           predicted=float(p), realized=float(a))
            for i, (p, a) in enumerate(zip(predicted, realized))]


def test_loss_values():
    print("\n=== Testing Losses ===")
    report = losses(make_records('HAR-J', [-9.0, -10.0], [-9.5, -9.5]))
    assert report.mse == pytest.approx(0.25)
    assert report.mae == pytest.approx(0.5)
    assert report.hmse == pytest.approx(2.7701e-3, abs=1e-7)
    assert report.hmse == pytest.approx((1 / 19) ** 2, abs=1e-9)
    assert report.hmae == pytest.approx(1 / 19, abs=1e-9)
    assert report.hmae == pytest.approx(5.26316e-2, abs=1e-7)
    assert report.m == 2
    print(f"✓ {report.to_dict()}")


def naive_losses(predicted, realized):
    """Loop-by-loop losses over one model's records"""
    sq, ab, hsq, hab = [], [], [], []
    for p, a in zip(predicted, realized):
        err = p - a
        sq.append(err * err)
        ab.append(abs(err))
        ratio = 1.0 - p / a
        hsq.append(ratio * ratio)
        hab.append(abs(ratio))
    m = len(sq)
    return {kind: math.fsum(terms) / m
            for kind, terms in zip(LOSS_KINDS, (sq, ab, hsq, hab))}


def test_losses_match_loop_oracle():
    rng = np.random.default_rng(11)
    for model_id in MODEL_IDS:
        realized = rng.normal(-9.0, 1.0, 750)
        predicted = realized + rng.normal(0.0, 0.6, 750)
        report = losses(make_records(model_id, predicted, realized))
        oracle = naive_losses(predicted, realized)
        for kind in LOSS_KINDS:
            assert report.get(kind) == pytest.approx(oracle[kind], rel=1e-14, abs=0.0), (model_id, kind)


def test_losses_grow_with_errors():
    rng = np.random.default_rng(12)
    realized = rng.normal(-9.0, 1.0, 400)
    errors = rng.normal(0.0, 0.5, 400)
    small = losses(make_records('HAR-J', realized + errors, realized))
    large = losses(make_records('HAR-J', realized + 1.5 * errors, realized))
    for kind in LOSS_KINDS:
        assert large.get(kind) > small.get(kind), kind
    assert large.mse == pytest.approx(2.25 * small.mse, rel=1e-12)
    assert large.hmae == pytest.approx(1.5 * small.hmae, rel=1e-12)


def test_dm_pvalues_match_high_precision_tails():
    rng = np.random.default_rng(13)
    a = rng.normal(-9, 1, 600)
    bench = make_records('HAR-J', a + rng.normal(0, 1.0, 600), a)
    for sd in (1.1, 1.0, 0.97, 0.9, 0.8):
        comp = make_records('RSV-J', a + rng.normal(0, sd, 600), a)
        for lag in (0, 3):
            result = dm_test(bench, comp, 'mse', lrv_lag=lag)
            with mpmath.workdps(50):
                oracle = float(mpmath.erfc(abs(mpmath.mpf(result.statistic)) / mpmath.sqrt(2)))
            assert result.p_value == pytest.approx(oracle, abs=1e-12)

            corrected = dm_test(bench, comp, 'mse', lrv_lag=lag, hln=True)
            nu = corrected.m - 1
            with mpmath.workdps(50):
                t2 = mpmath.mpf(corrected.statistic) ** 2
                t_oracle = float(mpmath.betainc(mpmath.mpf(nu) / 2, mpmath.mpf(1) / 2, 0,
                                                nu / (nu + t2), regularized=True))
            assert corrected.p_value == pytest.approx(t_oracle, abs=1e-12)

    with mpmath.workdps(50):
        assert float(mpmath.erfc(mpmath.mpf('1.959963984540054') / mpmath.sqrt(2))) == pytest.approx(0.05, abs=1e-12)


def test_zero_realized_exclusion():
    realized = np.full(200, -9.0)
    realized[10] = 0.0
    report = losses(make_records('HAR-J', np.full(200, -8.0), realized))
    assert report.excluded == 1
    assert report.hmae == pytest.approx(1.0 / 9.0)
    assert report.mse == pytest.approx((199 * 1.0 + 64.0) / 200)

    realized[20:23] = 0.0
    with pytest.raises(DataError):
        losses(make_records('HAR-J', np.full(200, -8.0), realized))


def test_long_run_variance():
    rng = np.random.default_rng(0)
    d = rng.standard_normal(50)
    u = d - d.mean()
    oracle = (u @ u) / 50
    for l in (1, 2):
        oracle += 2 * (1 - l / 3) * (u[l:] @ u[:-l]) / 50
    assert long_run_variance(d, 2) == pytest.approx(oracle, rel=1e-12)
    assert long_run_variance(d, 0) == pytest.approx(np.var(d), rel=1e-12)


def test_dm_sign_and_antisymmetry():
    print("\n=== Testing Diebold-Mariano ===")
    rng = np.random.default_rng(1)
    a = rng.normal(-9, 1, 500)
    bench = make_records('HAR-J', a + rng.normal(0, 1.0, 500), a)
    comp = make_records('RSV-J', a + rng.normal(0, 0.5, 500), a)
    forward = dm_test(bench, comp, 'mse')
    backward = dm_test(comp, bench, 'mse')
    assert forward.statistic > 0
    assert forward.significance == '1%'
    assert forward.stars == '***'
    assert backward.statistic == pytest.approx(-forward.statistic)
    assert backward.p_value == pytest.approx(forward.p_value)
    print(f"✓ DM = {forward.statistic:.2f}, p = {forward.p_value:.2e}")


def test_dm_errors():
    a = np.full(40, -9.0)
    same = make_records('HAR-J', a + 0.3, a)
    other = make_records('RSV-J', a + 0.3, a)
    with pytest.raises(IdenticalForecastsError):
        dm_test(same, other)

    shifted = make_records('RSV-J', a + 0.1, a, start=START + timedelta(days=1))
    with pytest.raises(UnpairedForecastsError):
        dm_test(same, shifted)

    with pytest.raises(InsufficientDataError):
        dm_test(same[:29], make_records('RSV-J', a[:29] + 0.1, a[:29]))


def test_constant_loss_gap_is_infinite():
    a = np.full(40, -9.0)
    result = dm_test(make_records('HAR-J', a + 0.5, a), make_records('RSV-J', a + 0.25, a))
    assert result.infinite
    assert result.statistic == np.inf
    assert result.significance == '1%'


def test_hln_correction():
    rng = np.random.default_rng(2)
    a = rng.normal(-9, 1, 300)
    bench = make_records('HAR-J', a + rng.normal(0, 1.0, 300), a)
    comp = make_records('RSV-J', a + rng.normal(0, 0.9, 300), a)
    plain = dm_test(bench, comp, 'mae', lrv_lag=0)
    corrected = dm_test(bench, comp, 'mae', lrv_lag=0, hln=True)
    assert corrected.statistic == pytest.approx(plain.statistic * np.sqrt(299 / 300))
    assert corrected.p_value >= plain.p_value
    assert corrected.hln


def test_dm_size():
    """Equal-accuracy forecasts reject at roughly the nominal 5% rate"""
    rng = np.random.default_rng(3)
    reps, m = 1000, 3000
    a = np.full(m, -9.0)
    rejections = 0
    for _ in range(reps):
        bench = make_records('HAR-J', a + rng.standard_normal(m), a)
        comp = make_records('RSV-J', a + rng.standard_normal(m), a)
        rejections += dm_test(bench, comp, 'mse').p_value <= 0.05
    rate = rejections / reps
    assert 0.03 <= rate <= 0.07
    print(f"✓ Rejection rate {rate:.3f}")


def _panel(m=200, seed=4):
    rng = np.random.default_rng(seed)
    a = rng.normal(-9, 1, m)
    records = {}
    for i, model_id in enumerate(MODEL_IDS):
        records[model_id] = make_records(model_id, a + rng.normal(0, 0.5 + 0.05 * i, m), a)
    return ForecastPanel(records=records)


def test_dm_grid():
    panel = _panel()
    results = dm_matrix(panel, threads=3)
    assert len(results) == 112
    assert {r.loss for r in results} == set(LOSS_KINDS)
    first = [(r.benchmark, r.comparison) for r in results if r.loss == 'mse']
    assert first[0] == ('HAR-J', 'HAR-AJ')
    assert first[-1] == ('RSV-J-LE', 'RSV-AJ-LE')
    assert all(MODEL_IDS.index(b) < MODEL_IDS.index(c) for b, c in first)

    panel.records['RSV-AJ-LE'] = panel.records['RSV-AJ-LE'][1:]
    with pytest.raises(UnpairedForecastsError):
        dm_matrix(panel)


def test_loss_table_and_best():
    reports = loss_table(_panel())
    assert [r.model_id for r in reports] == list(MODEL_IDS)
    best = best_models(reports)
    assert set(best) == set(LOSS_KINDS)
    assert best['mse'] == min(reports, key=lambda r: r.mse).model_id


TESTS = [
    ("Loss Values", test_loss_values),
    ("Loss Oracle", test_losses_match_loop_oracle),
    ("Loss Monotonicity", test_losses_grow_with_errors),
    ("Zero Realized", test_zero_realized_exclusion),
    ("Long-Run Variance", test_long_run_variance),
    ("DM Sign", test_dm_sign_and_antisymmetry),
    ("DM Errors", test_dm_errors),
    ("Infinite DM", test_constant_loss_gap_is_infinite),
    ("HLN Correction", test_hln_correction),
    ("DM p-values", test_dm_pvalues_match_high_precision_tails),
    ("DM Size", test_dm_size),
    ("DM Grid", test_dm_grid),
    ("Loss Table", test_loss_table_and_best),
]


def main():
    print("=" * 60)
    print("Evaluation Test Suite")
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
