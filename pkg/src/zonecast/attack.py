"""False data injection on temperature inputs.

Two attack kinds: iid Gaussian noise (the blunt instrument) and a norm-ball
constrained projected-gradient attack that pushes a fitted model's total
forecast in a chosen direction. Attacks only touch inference-time
temperature; training data is never perturbed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import TimeSeries
from .errors import NotTemperatureDependent, SchemaMismatch
from .features import DesignBuilder
from .regress import FittedModel, predict


class AttackKind(enum.Enum):
    GAUSSIAN = "gaussian"
    BOUNDED_OPT = "bounded_opt"


@dataclass(frozen=True)
class AttackSpec:
    kind: AttackKind
    target_zone: str
    seed: int = 0
    # gaussian parameters
    mean: float = 0.0
    sd: float = 1.0
    # bounded optimization parameters
    epsilon: float = 1.0
    p: float = math.inf
    direction: int = -1  # +1 inflate, -1 deflate
    max_iters: int = 200
    step_size: float | None = None  # default epsilon / 50

    def __post_init__(self):
        if self.kind is AttackKind.BOUNDED_OPT:
            if self.epsilon <= 0:
                raise ValueError("epsilon must be > 0")
            if self.p not in (1, 2, math.inf):
                raise ValueError("norm order must be 1, 2 or inf")
            if self.direction not in (1, -1):
                raise ValueError("direction must be +1 or -1")
            if self.max_iters < 1:
                raise ValueError("max_iters must be >= 1")
            if self.step_size is not None and self.step_size <= 0:
                raise ValueError("step_size must be > 0")
        elif self.sd < 0:
            raise ValueError("sd must be >= 0")


@dataclass(frozen=True)
class AttackResult:
    perturbed_temperature: TimeSeries
    delta: np.ndarray = field(repr=False)
    delta_norm: float
    forecast_shift: np.ndarray = field(repr=False)
    iterations_used: int
    feasible: bool

    @property
    def total_shift_mw(self) -> float:
        return float(np.sum(self.forecast_shift))


def inject_gaussian(temperature: TimeSeries, spec: AttackSpec) -> TimeSeries:
    """Add seeded iid Normal(mean, sd^2) noise to every hour."""
    if spec.kind is not AttackKind.GAUSSIAN:
        raise ValueError("spec kind must be GAUSSIAN")
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(spec.mean, spec.sd, len(temperature))
    return temperature.with_values(temperature.values + noise)


def lp_norm(delta: np.ndarray, p: float) -> float:
    if p == math.inf:
        return float(np.max(np.abs(delta))) if len(delta) else 0.0
    return float(np.sum(np.abs(delta) ** p) ** (1.0 / p))


def project_lp(delta: np.ndarray, epsilon: float, p: float) -> np.ndarray:
    """Euclidean projection onto the p-norm ball of radius epsilon."""
    delta = np.asarray(delta, dtype=float)
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if p == math.inf:
        return np.clip(delta, -epsilon, epsilon)
    if p == 2:
        nrm = float(np.linalg.norm(delta))
        return delta if nrm <= epsilon else delta * (epsilon / nrm)
    if p == 1:
        mag = np.abs(delta)
        if mag.sum() <= epsilon:
            return delta.copy()
        # sort-based simplex projection (soft threshold at the exact theta)
        u = np.sort(mag)[::-1]
        css = np.cumsum(u)
        j = np.arange(1, len(u) + 1)
        rho = int(np.max(np.flatnonzero(u > (css - epsilon) / j)))
        theta = (css[rho] - epsilon) / (rho + 1)
        return np.sign(delta) * np.maximum(mag - theta, 0.0)
    raise ValueError("norm order must be 1, 2 or inf")


def optimize_attack(model: FittedModel, builder: DesignBuilder,
                    spec: AttackSpec) -> AttackResult:
    """Projected-gradient attack on the model's total forecast.

    Minimizes -direction * sum(yhat) over the epsilon-ball, so direction=+1
    inflates and direction=-1 deflates the forecast. Fixed step size with
    best-iterate tracking; the returned perturbation is always feasible.
    """
    if spec.kind is not AttackKind.BOUNDED_OPT:
        raise ValueError("spec kind must be BOUNDED_OPT")
    if model.labels != builder.labels or model.kind != builder.kind:
        raise SchemaMismatch("model does not match the design builder")
    if not builder.temperature_dependent:
        raise NotTemperatureDependent("no design column depends on temperature")

    t0 = builder.temperature0
    clean_forecast = predict(model, builder.design())
    step = spec.step_size if spec.step_size is not None else spec.epsilon / 50.0

    def objective(delta: np.ndarray) -> tuple[float, np.ndarray]:
        yhat = predict(model, builder.design(t0 + delta))
        return -spec.direction * float(np.sum(yhat)), yhat

    delta = np.zeros(len(t0))
    best_delta, (best_obj, best_yhat) = delta, objective(delta)
    iters = 0
    for iters in range(1, spec.max_iters + 1):
        grad = -spec.direction * builder.sum_forecast_gradient(model.beta, t0 + delta)
        delta = project_lp(delta - step * grad, spec.epsilon, spec.p)
        obj, yhat = objective(delta)
        if obj < best_obj:
            best_obj, best_delta, best_yhat = obj, delta, yhat

    perturbed = _apply_delta(builder, best_delta)
    return AttackResult(
        perturbed_temperature=perturbed,
        delta=best_delta,
        delta_norm=lp_norm(best_delta, spec.p),
        forecast_shift=best_yhat - clean_forecast,
        iterations_used=iters,
        feasible=lp_norm(best_delta, spec.p) <= spec.epsilon * (1.0 + 1e-12),
    )


def _apply_delta(builder: DesignBuilder, delta: np.ndarray) -> TimeSeries:
    """Perturbed temperature series over the builder's design rows."""
    hours = builder.row_hours
    if np.any(np.diff(hours) != 1):
        raise ValueError("design rows are not contiguous; cannot emit a series")
    from .core import HourlyTimestamp, Unit
    return TimeSeries(Unit.DEG_F, HourlyTimestamp.from_epoch_hour(int(hours[0])),
                      builder.temperature0 + delta)
