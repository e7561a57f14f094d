import math

import numpy as np
import pytest

from zonecast.attack import AttackKind, AttackSpec
from zonecast.detect import (Baseline, MeasureBaseline, calibrate_baseline,
                             detection_experiment, evaluate_constraints)
from zonecast.errors import InsufficientData, ParameterMismatch
from zonecast.similarity import SimilarityParams
from zonecast.synth import SynthConfig, generate_synthetic


def forecast_pair(n=2000, seed=0, rho=0.9):
    rng = np.random.default_rng(seed)
    shared = rng.standard_normal(n)
    x = 1000 + 50 * (rho * shared + (1 - rho) * rng.standard_normal(n))
    y = 1100 + 60 * (rho * shared + (1 - rho) * rng.standard_normal(n))
    return x, y


class TestCalibrateBaseline:
    def test_deterministic_per_seed(self):
        x, y = forecast_pair()
        a = calibrate_baseline(x, y, seed=5)
        b = calibrate_baseline(x, y, seed=5)
        assert a.measures.keys() == b.measures.keys()
        for name in a.measures:
            assert a.measures[name] == b.measures[name]

    def test_quantiles_are_ordered(self):
        x, y = forecast_pair(seed=1)
        base = calibrate_baseline(x, y, seed=2)
        assert base.measures
        for mb in base.measures.values():
            q = mb.quantiles
            assert q[0.5] <= q[0.9] <= q[0.95] <= q[0.99]
            assert mb.sd > 0

    def test_identical_windows_exclude_everything(self):
        # both forecasts constant: every measure is degenerate or failing
        x = np.full(500, 1000.0)
        y = np.full(500, 1200.0)
        base = calibrate_baseline(x, y, seed=0)
        assert not base.measures
        assert base.excluded

    def test_too_few_windows(self):
        x, y = forecast_pair(n=400)
        with pytest.raises(InsufficientData):
            calibrate_baseline(x, y, n_windows=10)

    def test_too_short_series(self):
        x, y = forecast_pair(n=100)
        with pytest.raises(InsufficientData):
            calibrate_baseline(x, y, window_length=168)

    def test_baseline_validates_window_count(self):
        with pytest.raises(ValueError):
            Baseline({}, {}, SimilarityParams(), 168, 5)


class TestEvaluateConstraints:
    def make_baseline(self, seed=3):
        x, y = forecast_pair(seed=seed)
        return x, y, calibrate_baseline(x, y, seed=seed)

    def test_center_of_band_is_unflagged(self):
        # hand-built baseline: observed == mean gives g = -tau * sd exactly
        x, y = forecast_pair(n=168, seed=4)
        base = calibrate_baseline(*forecast_pair(seed=4), seed=4)
        verdict = evaluate_constraints(x, y, base, tau=1e9)
        for name, v in verdict.per_measure.items():
            mb = base.measures[name]
            assert v.g == pytest.approx(abs(v.observed - mb.mean) - 1e9 * mb.sd)
            assert not v.flagged

    def test_self_consistency_with_large_tau(self):
        # tau >= max |z| over measures implies no flags
        x, y, base = self.make_baseline()
        verdict = evaluate_constraints(x[:168], y[:168], base, tau=1.0)
        zmax = max(abs(v.z) for v in verdict.per_measure.values())
        relaxed = evaluate_constraints(x[:168], y[:168], base, tau=zmax + 1e-9)
        assert not relaxed.any_flag
        for v in relaxed.per_measure.values():
            assert v.g <= 0

    def test_flag_iff_g_positive(self):
        x, y, base = self.make_baseline(seed=6)
        verdict = evaluate_constraints(x[:168], y[:168], base, tau=0.5)
        for v in verdict.per_measure.values():
            assert v.flagged == (v.g > 0)

    def test_excluded_measures_never_flag(self):
        x, y, base = self.make_baseline(seed=7)
        # drop one measure into the excluded set by hand
        name = next(iter(base.measures))
        measures = dict(base.measures)
        del measures[name]
        pruned = Baseline(measures, {**base.excluded, name: "test"},
                          base.params, base.window_length, base.n_windows)
        verdict = evaluate_constraints(x[:168], y[:168], pruned, tau=1e-6)
        assert name not in verdict.per_measure

    def test_window_length_mismatch(self):
        x, y, base = self.make_baseline()
        with pytest.raises(ParameterMismatch):
            evaluate_constraints(x[:100], y[:100], base, tau=3.0)

    def test_rejects_non_positive_tau(self):
        x, y, base = self.make_baseline()
        with pytest.raises(ValueError):
            evaluate_constraints(x[:168], y[:168], base, tau=0.0)

    def test_k_of_n_vote(self):
        x, y, base = self.make_baseline(seed=8)
        tight = evaluate_constraints(x[:168], y[:168], base, tau=1e-6, k=3)
        assert tight.n_flagged == len(tight.per_measure)
        assert tight.any_flag and tight.k_of_n_flag

    def test_false_positive_rate_on_clean_windows(self):
        # clean windows from the calibration distribution: any-flag rate at
        # tau=3 stays small
        x, y = forecast_pair(n=4000, seed=9)
        base = calibrate_baseline(x, y, n_windows=100, seed=9)
        rng = np.random.default_rng(10)
        flags = 0
        trials = 100
        for _ in range(trials):
            s = int(rng.integers(0, len(x) - 168 + 1))
            if evaluate_constraints(x[s:s + 168], y[s:s + 168], base, tau=3.0).any_flag:
                flags += 1
        assert flags / trials <= 0.05


class TestDetectionExperiment:
    def run(self, sd=2.0, seed=0, tau=3.0):
        ds = generate_synthetic(SynthConfig(seed=5, n_hours=2000))
        spec = AttackSpec(AttackKind.GAUSSIAN, "WEST", sd=sd)
        return detection_experiment(ds, "f1", spec, tau=tau, n_trials=10,
                                    seed=seed, n_windows=30)

    def test_deterministic(self):
        a, b = self.run(seed=3), self.run(seed=3)
        assert a.detection_rate == b.detection_rate
        assert a.false_positive_rate == b.false_positive_rate
        assert a.mean_abs_forecast_shift == b.mean_abs_forecast_shift

    def test_rates_are_proportions(self):
        r = self.run()
        assert 0.0 <= r.detection_rate <= 1.0
        assert 0.0 <= r.false_positive_rate <= 1.0
        assert r.n_trials == 10
        for rate in (*r.per_measure_detection.values(),
                     *r.per_measure_false_positive.values()):
            assert 0.0 <= rate <= 1.0

    def test_stronger_attack_shifts_forecast_more(self):
        weak, strong = self.run(sd=0.5), self.run(sd=4.0)
        assert strong.mean_abs_forecast_shift > weak.mean_abs_forecast_shift

    def test_bounded_attack_runs(self):
        ds = generate_synthetic(SynthConfig(seed=6, n_hours=2000))
        spec = AttackSpec(AttackKind.BOUNDED_OPT, "WEST", epsilon=8.0,
                          p=math.inf, direction=-1, max_iters=40)
        r = detection_experiment(ds, "f2", spec, n_trials=5, seed=1, n_windows=25)
        assert r.mean_abs_forecast_shift > 0

    def test_unknown_zone(self):
        ds = generate_synthetic(SynthConfig(seed=5, n_hours=2000))
        spec = AttackSpec(AttackKind.GAUSSIAN, "NOWHERE", sd=1.0)
        with pytest.raises(KeyError):
            detection_experiment(ds, "f1", spec, n_trials=2)
