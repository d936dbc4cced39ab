#!/usr/bin/env python3
"""
Test script for the simulator
Tests jump-diffusion paths against their truth and the HAR-type daily DGP
"""

import sys
import os
import math
import tempfile
import traceback

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pytest

from asymvol.config.exceptions import ExplosiveDGPError, ValidationError
from asymvol.services.features import MODEL_SPECS
from asymvol.services.ingest import sessions_from_ticks
from asymvol.services.measures import compute_dataset
from asymvol.services.simulator import (
    SimConfig, dataset_ticks, simulate, simulate_har_dgp, write_truth
)


def test_zero_volatility_path():
    print("\n=== Testing Jump-Diffusion Simulator ===")
    dataset, truth = simulate(SimConfig(days=5, n_per_day=50, sigma=0.0))
    assert len(dataset) == 5
    for session in dataset.sessions:
        assert session.n == 50
        assert np.all(session.returns == 0.0)
    assert np.all(truth.iv == 0.0) and np.all(truth.jump2 == 0.0)
    measures = compute_dataset(dataset)
    assert all(m.rv == 0.0 for m in measures)


def test_determinism():
    config = SimConfig(days=20, n_per_day=78, vol_model='log_ou', rho=-0.5,
                       jump_intensity=0.3, seed=7)
    first, truth_a = simulate(config)
    second, truth_b = simulate(config)
    for a, b in zip(first.sessions, second.sessions):
        np.testing.assert_array_equal(a.returns, b.returns)
    np.testing.assert_array_equal(truth_a.iv, truth_b.iv)
    other, _ = simulate(SimConfig(days=20, n_per_day=78, vol_model='log_ou', rho=-0.5,
                                  jump_intensity=0.3, seed=8))
    assert not np.array_equal(first.sessions[0].returns, other.sessions[0].returns)


def test_negative_jumps_only():
    _, truth = simulate(SimConfig(days=200, n_per_day=50, jump_intensity=0.5,
                                  jump_sign='negative', seed=3))
    assert np.all(truth.jump2_plus == 0.0)
    assert np.any(truth.jump2_minus > 0.0)
    assert all(np.all(s <= 0) for s in truth.jump_sizes)


def test_jump_accounting():
    """With no diffusion a day holding one jump has RV equal to its squared size"""
    dataset, truth = simulate(SimConfig(days=300, n_per_day=100, sigma=0.0,
                                        jump_intensity=0.6, seed=4))
    measures = compute_dataset(dataset)
    checked = 0
    for m, sizes, plus, minus in zip(measures, truth.jump_sizes, truth.jump2_plus, truth.jump2_minus):
        if len(sizes) == 1:
            assert m.rv == pytest.approx(sizes[0] ** 2, rel=1e-12)
            assert m.rsv_plus == pytest.approx(plus, abs=1e-18)
            assert m.rsv_minus == pytest.approx(minus, abs=1e-18)
            checked += 1
        elif len(sizes) == 0:
            assert m.rv == 0.0
    assert checked > 50


def test_realized_measures_track_truth():
    dataset, truth = simulate(SimConfig(days=2000, n_per_day=288, sigma=0.01, seed=5))
    measures = compute_dataset(dataset)
    rv = np.array([m.rv for m in measures])
    bv = np.array([m.bv for m in measures])
    assert truth.iv == pytest.approx(np.full(2000, 1e-4), rel=1e-9)
    assert rv.mean() == pytest.approx(1e-4, rel=0.01)
    assert bv.mean() == pytest.approx(1e-4, rel=0.02)
    print(f"✓ mean RV {rv.mean():.4e}, mean BV {bv.mean():.4e}")


def test_jumps_separate_rv_from_bv():
    dataset, truth = simulate(SimConfig(days=1000, n_per_day=288, sigma=0.01,
                                        jump_intensity=0.5, jump_sd=0.02, seed=6))
    measures = compute_dataset(dataset)
    rv = np.array([m.rv for m in measures])
    bv = np.array([m.bv for m in measures])
    assert (rv - truth.iv).mean() == pytest.approx(truth.jump2.mean(), rel=0.1)
    assert abs(bv.mean() - truth.iv.mean()) < 0.2 * (rv.mean() - truth.iv.mean())


def test_config_validation():
    for bad in (dict(days=0), dict(n_per_day=1), dict(rho=1.5), dict(vol_model='garch'),
                dict(jump_sign='up'), dict(sigma=-1.0), dict(jump_intensity=-0.1)):
        with pytest.raises(ValidationError):
            simulate(SimConfig(**bad))


def test_ticks_round_trip():
    dataset, _ = simulate(SimConfig(days=4, n_per_day=78, jump_intensity=1.0, seed=9))
    ticks = dataset_ticks(dataset)
    assert len(ticks) == 4 * 79
    rebuilt = sessions_from_ticks(ticks, market='simulated')
    assert [s.date for s in rebuilt.sessions] == [s.date for s in dataset.sessions]
    for a, b in zip(dataset.sessions, rebuilt.sessions):
        np.testing.assert_allclose(b.returns, a.returns, atol=1e-12)


def test_truth_file():
    _, truth = simulate(SimConfig(days=3, n_per_day=20, seed=10))
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, 'truth.csv')
        write_truth(path, truth)
        with open(path) as f:
            lines = f.read().splitlines()
    assert lines[0].startswith('#')
    assert lines[1] == 'date,iv,jump2_plus,jump2_minus'
    assert len(lines) == 5


def test_har_dgp_constant_level():
    print("\n=== Testing HAR DGP ===")
    measures = simulate_har_dgp({'c': -9.0}, MODEL_SPECS['HAR-J'], days=30, noise_sd=0.0)
    assert len(measures) == 30
    for m in measures:
        assert math.log(m.rv) == pytest.approx(-9.0, abs=1e-12)
        assert m.rsv_plus + m.rsv_minus == pytest.approx(m.rv, rel=1e-12)
        assert 0.0 <= m.bv <= m.rv


def test_har_dgp_stationary_mean():
    coeffs = {'c': -0.9, 'alpha1': 0.35, 'alpha2': 0.35, 'alpha3': 0.2}
    measures = simulate_har_dgp(coeffs, MODEL_SPECS['HAR-J'], days=3000, noise_sd=0.3, seed=1)
    ln_rv = np.log([m.rv for m in measures])
    assert ln_rv.mean() == pytest.approx(-9.0, abs=0.2)
    again = simulate_har_dgp(coeffs, MODEL_SPECS['HAR-J'], days=3000, noise_sd=0.3, seed=1)
    assert [m.rv for m in again] == [m.rv for m in measures]


def test_har_dgp_errors():
    with pytest.raises(ExplosiveDGPError):
        simulate_har_dgp({'c': -0.5, 'alpha1': 0.6, 'alpha2': 0.4}, MODEL_SPECS['HAR-J'],
                         days=10, noise_sd=0.1)
    with pytest.raises(ValidationError):
        simulate_har_dgp({'gamma': 1.0}, MODEL_SPECS['HAR-J'], days=10, noise_sd=0.1)
    with pytest.raises(ValidationError):
        simulate_har_dgp([0.0, 0.1], MODEL_SPECS['HAR-J'], days=10, noise_sd=0.1)


TESTS = [
    ("Zero Volatility", test_zero_volatility_path),
    ("Determinism", test_determinism),
    ("Negative Jumps", test_negative_jumps_only),
    ("Jump Accounting", test_jump_accounting),
    ("Measures Track Truth", test_realized_measures_track_truth),
    ("Jumps Split RV and BV", test_jumps_separate_rv_from_bv),
    ("Config Validation", test_config_validation),
    ("Ticks Round Trip", test_ticks_round_trip),
    ("Truth File", test_truth_file),
    ("HAR DGP Level", test_har_dgp_constant_level),
    ("HAR DGP Mean", test_har_dgp_stationary_mean),
    ("HAR DGP Errors", test_har_dgp_errors),
]


def main():
    print("=" * 60)
    print("Simulator Test Suite")
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
