"""Ordinary least squares fitting and fit statistics.

The solver is QR-based (Householder factorization via LAPACK); the normal
equations appear only as an independent oracle in the test suite. Rank is
probed on the R diagonal with a fixed relative tolerance so dropped-level
edge cases fail deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import DegenerateDof, RankDeficient, SchemaMismatch, ZeroVariance
from .features import DesignMatrix

RANK_TOL = 1e-10


@dataclass(frozen=True)
class FitStats:
    mae: float
    r2: float
    adj_r2: float


@dataclass(frozen=True)
class FittedModel:
    kind: str
    labels: tuple[str, ...]
    beta: np.ndarray
    train_stats: FitStats
    test_stats: FitStats | None = None

    def __post_init__(self):
        if len(self.beta) != len(self.labels):
            raise ValueError("coefficient count must match labels")

    def coefficient(self, label: str) -> float:
        return float(self.beta[self.labels.index(label)])

    def with_test_stats(self, stats: FitStats) -> "FittedModel":
        return FittedModel(self.kind, self.labels, self.beta,
                           self.train_stats, stats)

    def to_text(self) -> str:
        lines = [f"kind={self.kind}"]
        for scope, stats in (("train", self.train_stats), ("test", self.test_stats)):
            if stats is None:
                continue
            lines += [f"{scope}.mae={stats.mae!r}",
                      f"{scope}.r2={stats.r2!r}",
                      f"{scope}.adj_r2={stats.adj_r2!r}"]
        for label, b in zip(self.labels, self.beta):
            lines.append(f"coef.{label}={float(b)!r}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "FittedModel":
        kind = None
        stats: dict[str, dict[str, float]] = {"train": {}, "test": {}}
        labels, beta = [], []
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, value = line.partition("=")
            if key == "kind":
                kind = value
            elif key.startswith(("train.", "test.")):
                scope, name = key.split(".", 1)
                stats[scope][name] = float(value)
            elif key.startswith("coef."):
                labels.append(key[len("coef."):])
                beta.append(float(value))
            else:
                raise ValueError(f"unrecognized line {line!r}")
        if kind is None or not labels:
            raise ValueError("model text missing kind or coefficients")
        train = FitStats(**stats["train"])
        test = FitStats(**stats["test"]) if stats["test"] else None
        return cls(kind, tuple(labels), np.array(beta), train, test)

    @classmethod
    def load(cls, path: str | Path) -> "FittedModel":
        return cls.from_text(Path(path).read_text())


def metrics(y: np.ndarray, yhat: np.ndarray, p_predictors: int) -> FitStats:
    """MAE, R-squared and adjusted R-squared of predictions against truth."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if len(y) != len(yhat) or len(y) < 2:
        raise ValueError("y and yhat must be equal-length with >= 2 entries")
    n = len(y)
    mae = float(np.mean(np.abs(y - yhat)))
    sst = float(np.sum((y - np.mean(y)) ** 2))
    if sst < 1e-12:
        raise ZeroVariance("target is constant; R-squared undefined")
    sse = float(np.sum((y - yhat) ** 2))
    r2 = 1.0 - sse / sst
    if n <= p_predictors + 1:
        raise DegenerateDof(f"adjusted R2 needs n > p+1 (n={n}, p={p_predictors})")
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / (n - p_predictors - 1)
    return FitStats(mae=mae, r2=r2, adj_r2=adj_r2)


def fit_ols(X: DesignMatrix) -> FittedModel:
    """Least-squares fit via Householder QR, with a deterministic rank probe."""
    A, y = X.X, X.target
    n, k = A.shape
    if n < k:
        raise RankDeficient(f"need rows >= columns, got {n} x {k}")
    Q, R = np.linalg.qr(A, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.min() < RANK_TOL * diag.max():
        worst = X.labels[int(np.argmin(diag))]
        raise RankDeficient(f"numerically rank-deficient design (near {worst!r})")
    beta = scipy.linalg.solve_triangular(R, Q.T @ y)
    stats = metrics(y, A @ beta, p_predictors=k - 1)
    return FittedModel(X.kind, X.labels, beta, stats)


def predict(model: FittedModel, X: DesignMatrix) -> np.ndarray:
    if X.labels != model.labels:
        raise SchemaMismatch("design columns do not match the fitted model")
    return X.X @ model.beta


def fit_and_evaluate(train: DesignMatrix, test: DesignMatrix) -> FittedModel:
    """Fit on the train split and attach test-set statistics."""
    model = fit_ols(train)
    test_stats = metrics(test.target, predict(model, test),
                         p_predictors=test.n_columns - 1)
    return model.with_test_stats(test_stats)
