import numpy as np
from pytest import mark

from analysis.verification import SAMPLING_RANGES, draw_sample, measure_rk4_order, run_verification


def test_small_run_passes():
    report = run_verification(samples=200, seed=7)
    assert report.passed, report
    assert report.samples == 200
    assert report.seed == 7


def test_run_is_deterministic():
    assert run_verification(samples=50, seed=3) == run_verification(samples=50, seed=3)


def test_samples_stay_in_range():
    rng = np.random.default_rng(0)
    for _ in range(500):
        sample = draw_sample(rng)
        for name, (lo, hi, _) in SAMPLING_RANGES.items():
            assert lo <= sample[name] <= hi
        p_max = sample['v_nominal'] ** 2 / (4.0 * sample['droop_gain'])
        assert 0.01 * p_max <= sample['power'] <= 0.99 * p_max


def test_rk4_order():
    assert 12.0 <= measure_rk4_order() <= 20.0


@mark.slow
def test_full_verification():
    report = run_verification()
    assert report.passed, report
    assert report.samples == 10000
