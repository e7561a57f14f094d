"""Similarity-baseline calibration and constraint-based anomaly detection.

The physical-consistency constraint is realized as a two-sided z-score band
per measure: g_m = |d_m - mu_m| - tau * sigma_m, flagged when g_m > 0.
Baselines come from bootstrap windows of clean inter-zone forecast pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .attack import AttackKind, AttackSpec, inject_gaussian, optimize_attack
from .core import ZERO_VARIANCE_TOL, ZonalDataset
from .errors import InsufficientData, ParameterMismatch
from .features import DesignBuilder, train_test_split
from .regress import fit_and_evaluate, predict
from .similarity import SimilarityParams, similarity_vector

QUANTILES = (0.5, 0.9, 0.95, 0.99)


@dataclass(frozen=True)
class MeasureBaseline:
    mean: float
    sd: float
    quantiles: dict[float, float]


@dataclass(frozen=True)
class Baseline:
    measures: dict[str, MeasureBaseline]
    excluded: dict[str, str]
    params: SimilarityParams
    window_length: int
    n_windows: int

    def __post_init__(self):
        if self.n_windows < 20:
            raise ValueError("baseline needs at least 20 windows")


@dataclass(frozen=True)
class MeasureVerdict:
    observed: float
    z: float
    g: float
    flagged: bool


@dataclass(frozen=True)
class DetectionVerdict:
    per_measure: dict[str, MeasureVerdict]
    tau: float
    k: int

    @property
    def any_flag(self) -> bool:
        return any(v.flagged for v in self.per_measure.values())

    @property
    def k_of_n_flag(self) -> bool:
        return sum(v.flagged for v in self.per_measure.values()) >= self.k

    @property
    def n_flagged(self) -> int:
        return sum(v.flagged for v in self.per_measure.values())


def calibrate_baseline(forecast_x: np.ndarray, forecast_y: np.ndarray,
                       window_length: int = 168, n_windows: int = 50,
                       seed: int = 0,
                       params: SimilarityParams | None = None) -> Baseline:
    """Bootstrap similarity baselines from clean forecast-pair windows."""
    params = params or SimilarityParams()
    x = np.asarray(forecast_x, dtype=float)
    y = np.asarray(forecast_y, dtype=float)
    if len(x) != len(y):
        raise ParameterMismatch("forecast pair lengths differ")
    if len(x) < window_length:
        raise InsufficientData(f"need at least {window_length} hours, got {len(x)}")
    if n_windows < 20:
        raise InsufficientData("need at least 20 calibration windows")

    rng = np.random.default_rng(seed)
    starts = rng.integers(0, len(x) - window_length + 1, size=n_windows)
    samples: dict[str, list[float]] = {}
    for s in starts:
        vec = similarity_vector(x[s:s + window_length], y[s:s + window_length], params)
        for name, value in vec.values.items():
            samples.setdefault(name, []).append(value)

    measures: dict[str, MeasureBaseline] = {}
    excluded: dict[str, str] = {}
    for name, vals in samples.items():
        arr = np.asarray(vals)
        if len(arr) < n_windows or not np.all(np.isfinite(arr)):
            excluded[name] = "non-finite or missing window values"
            continue
        sd = float(np.std(arr, ddof=1))
        if sd < ZERO_VARIANCE_TOL:
            excluded[name] = "degenerate (zero variance across windows)"
            continue
        measures[name] = MeasureBaseline(
            mean=float(np.mean(arr)), sd=sd,
            quantiles={q: float(np.quantile(arr, q)) for q in QUANTILES})
    return Baseline(measures, excluded, params, window_length, n_windows)


def evaluate_constraints(forecast_x: np.ndarray, forecast_y: np.ndarray,
                         baseline: Baseline, tau: float,
                         k: int = 1) -> DetectionVerdict:
    """Apply the z-band constraint of each calibrated measure to one window."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    x = np.asarray(forecast_x, dtype=float)
    y = np.asarray(forecast_y, dtype=float)
    if len(x) != baseline.window_length or len(y) != baseline.window_length:
        raise ParameterMismatch(
            f"verdict window must match calibration length {baseline.window_length}")
    vec = similarity_vector(x, y, baseline.params)
    per_measure: dict[str, MeasureVerdict] = {}
    for name, mb in baseline.measures.items():
        if name not in vec.values or not np.isfinite(vec.values[name]):
            continue
        d = vec.values[name]
        z = (d - mb.mean) / mb.sd
        g = abs(d - mb.mean) - tau * mb.sd
        per_measure[name] = MeasureVerdict(observed=d, z=z, g=g, flagged=g > 0)
    return DetectionVerdict(per_measure, tau=tau, k=k)


@dataclass(frozen=True)
class ExperimentResult:
    detection_rate: float
    false_positive_rate: float
    per_measure_detection: dict[str, float]
    per_measure_false_positive: dict[str, float]
    mean_abs_forecast_shift: float
    n_trials: int
    baseline: Baseline = field(repr=False)


def _fit_zone(dataset: ZonalDataset, zone: str, model_kind: str,
              split_ratio: float, seed: int):
    builder = DesignBuilder(model_kind, dataset.load(zone), dataset.temperature(zone))
    design = builder.design()
    train, test = train_test_split(design, split_ratio, seed)
    model = fit_and_evaluate(train, test)
    return builder, model


def detection_experiment(dataset: ZonalDataset, model_kind: str,
                         attack: AttackSpec, tau: float = 3.0,
                         n_trials: int = 20, seed: int = 0,
                         split_ratio: float = 0.7, window_length: int = 168,
                         n_windows: int = 50,
                         params: SimilarityParams | None = None) -> ExperimentResult:
    """Fit clean models, attack the target zone's temperature, score detection.

    Per trial: a held-out window position and (for Gaussian attacks) a fresh
    noise draw; the clean window scores the false-positive side, the attacked
    window the detection side.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    params = params or SimilarityParams()
    target = attack.target_zone
    if target not in dataset.zones:
        raise KeyError(f"unknown target zone {target!r}")
    other = next(z for z in dataset.zone_ids if z != target)

    ss = np.random.SeedSequence(seed)
    split_seed, cal_seed, trial_seed = [int(s.generate_state(1)[0])
                                       for s in ss.spawn(3)]
    b_target, m_target = _fit_zone(dataset, target, model_kind, split_ratio, split_seed)
    b_other, m_other = _fit_zone(dataset, other, model_kind, split_ratio, split_seed)

    clean_target = predict(m_target, b_target.design())
    clean_other = predict(m_other, b_other.design())
    baseline = calibrate_baseline(clean_target, clean_other, window_length,
                                  n_windows, cal_seed, params)

    rng = np.random.default_rng(trial_seed)
    n = len(clean_target)
    detections, false_positives, shifts = [], [], []
    pm_det: dict[str, int] = {}
    pm_fp: dict[str, int] = {}
    for _ in range(n_trials):
        start = int(rng.integers(0, n - window_length + 1))
        sl = slice(start, start + window_length)

        clean_verdict = evaluate_constraints(clean_target[sl], clean_other[sl],
                                             baseline, tau)
        false_positives.append(clean_verdict.any_flag)

        if attack.kind is AttackKind.GAUSSIAN:
            trial_spec = replace(attack, seed=int(rng.integers(0, 2 ** 63 - 1)))
            temp_rows = b_target.temperature0
            noise_rng = np.random.default_rng(trial_spec.seed)
            attacked_temp = temp_rows + noise_rng.normal(trial_spec.mean,
                                                         trial_spec.sd, len(temp_rows))
            attacked_forecast = predict(m_target, b_target.design(attacked_temp))
        else:
            result = optimize_attack(m_target, b_target, attack)
            attacked_forecast = clean_target + result.forecast_shift

        attack_verdict = evaluate_constraints(attacked_forecast[sl], clean_other[sl],
                                              baseline, tau)
        detections.append(attack_verdict.any_flag)
        shifts.append(float(np.mean(np.abs(attacked_forecast - clean_target))))
        for name, v in attack_verdict.per_measure.items():
            pm_det[name] = pm_det.get(name, 0) + int(v.flagged)
        for name, v in clean_verdict.per_measure.items():
            pm_fp[name] = pm_fp.get(name, 0) + int(v.flagged)

    return ExperimentResult(
        detection_rate=float(np.mean(detections)),
        false_positive_rate=float(np.mean(false_positives)),
        per_measure_detection={k: v / n_trials for k, v in pm_det.items()},
        per_measure_false_positive={k: v / n_trials for k, v in pm_fp.items()},
        mean_abs_forecast_shift=float(np.mean(shifts)),
        n_trials=n_trials,
        baseline=baseline,
    )
