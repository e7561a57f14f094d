"""Distance and similarity measures between equal-length hourly series.

Five families: Lp norms on raw values, Pearson-correlation distances,
autocorrelation-vector distance with a weight matrix, periodogram distance
(raw and variance-normalized), and the SAX symbolic distance (MINDIST).

All measures satisfy d(x, x) = 0, symmetry and nonnegativity; only the Lp
family is a metric (triangle inequality).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm

from .core import ZERO_VARIANCE_TOL, TimeSeries, require_same_length, znormalize_values
from .errors import (LagTooLarge, LengthMismatch, NonPositiveWeight,
                     ParameterMismatch, ZeroVariance)

MEASURE_NAMES = ("d_euc", "d_manhattan", "d_linf", "d_minkowski",
                 "d_cor1", "d_cor2", "d_acf", "d_per", "d_per_norm", "d_sax")

#: One representative per family, in the result-table row order.
FAMILY_MEASURES = {
    "lp": "d_euc",
    "correlation": "d_cor1",
    "autocorrelation": "d_acf",
    "periodogram": "d_per_norm",
    "symbolic": "d_sax",
}


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, TimeSeries) else np.asarray(x, dtype=float)


def d_lp(x, y, p: float) -> float:
    """Lp distance; p may be 1, any finite p > 1, or math.inf."""
    xv, yv = _values(x), _values(y)
    require_same_length(xv, yv)
    diff = np.abs(xv - yv)
    if p == math.inf:
        return float(diff.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == 1:
        return float(diff.sum())
    return float(np.sum(diff ** p) ** (1.0 / p))


def pearson_cor(x, y) -> float:
    xv, yv = _values(x), _values(y)
    require_same_length(xv, yv)
    if len(xv) < 2:
        raise ValueError("correlation needs at least 2 points")
    xc, yc = xv - xv.mean(), yv - yv.mean()
    sx = math.sqrt(float(np.sum(xc * xc)))
    sy = math.sqrt(float(np.sum(yc * yc)))
    if sx < ZERO_VARIANCE_TOL or sy < ZERO_VARIANCE_TOL:
        raise ZeroVariance("correlation undefined for a constant series")
    r = float(np.sum(xc * yc)) / (sx * sy)
    return max(-1.0, min(1.0, r))


def d_cor1(x, y) -> float:
    return math.sqrt(2.0 * (1.0 - pearson_cor(x, y)))


def d_cor2(x, y, beta: float = 1.0) -> float:
    """((1-COR)/(1+COR))**(beta/2); +inf at COR = -1."""
    if beta <= 0:
        raise ValueError("beta must be > 0")
    r = pearson_cor(x, y)
    if r <= -1.0:
        return math.inf
    return ((1.0 - r) / (1.0 + r)) ** (beta / 2.0)


def acf_estimate(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags 0..max_lag (common-mean estimator)."""
    xv = _values(x)
    n = len(xv)
    if max_lag < 0 or n < max_lag + 2:
        raise LagTooLarge(f"series of length {n} cannot support lag {max_lag}")
    xc = xv - xv.mean()
    denom = float(np.sum(xc * xc))
    if denom < ZERO_VARIANCE_TOL:
        raise ZeroVariance("ACF undefined for a constant series")
    rho = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        rho[k] = float(np.sum(xc[: n - k] * xc[k:])) / denom
    return rho


def acf_weights(spec, max_lag: int) -> np.ndarray:
    """Diagonal weight vector over lags 1..max_lag.

    ``spec`` is "identity", ("geometric", lam), or an explicit positive vector.
    """
    if spec == "identity" or spec is None:
        return np.ones(max_lag)
    if isinstance(spec, tuple) and len(spec) == 2 and spec[0] == "geometric":
        lam = float(spec[1])
        if lam <= 0:
            raise NonPositiveWeight("geometric weight ratio must be > 0")
        return lam ** np.arange(1, max_lag + 1)
    w = np.asarray(spec, dtype=float)
    if len(w) != max_lag:
        raise ValueError(f"weight vector must have length {max_lag}")
    if np.any(w <= 0):
        raise NonPositiveWeight("all weights must be > 0")
    return w


def d_acf(x, y, max_lag: int, omega="identity") -> float:
    """Weighted Euclidean distance between ACF vectors over lags 1..max_lag."""
    w = acf_weights(omega, max_lag)
    rx = acf_estimate(x, max_lag)[1:]
    ry = acf_estimate(y, max_lag)[1:]
    diff = rx - ry
    return math.sqrt(float(np.sum(w * diff * diff)))


def periodogram(x) -> np.ndarray:
    """Ordinates (1/N)|sum_t x_t e^{-i t w_j}|^2 at w_j = 2 pi j / N, j=1..N//2.

    The modulus is invariant to the index origin, so the FFT over the stored
    0-based values gives the same ordinates as the 1-based sum.
    """
    xv = _values(x)
    n = len(xv)
    if n < 2:
        raise ValueError("periodogram needs at least 2 points")
    spectrum = np.fft.rfft(xv)
    return np.abs(spectrum[1: n // 2 + 1]) ** 2 / n


def d_periodogram(x, y, normalized: bool = False) -> float:
    xv, yv = _values(x), _values(y)
    require_same_length(xv, yv)
    px, py = periodogram(xv), periodogram(yv)
    if normalized:
        vx = float(np.var(xv, ddof=1))
        vy = float(np.var(yv, ddof=1))
        if vx < ZERO_VARIANCE_TOL or vy < ZERO_VARIANCE_TOL:
            raise ZeroVariance("normalized periodogram needs nonconstant series")
        px, py = px / vx, py / vy
    return math.sqrt(float(np.sum((px - py) ** 2)))


# --- SAX -------------------------------------------------------------------

@dataclass(frozen=True)
class SaxWord:
    symbols: tuple[int, ...]
    breakpoints: tuple[float, ...]
    n_original: int
    even_segments: bool

    def __post_init__(self):
        a = len(self.breakpoints) + 1
        if any(not 0 <= s < a for s in self.symbols):
            raise ValueError("symbol outside alphabet range")
        if any(b2 <= b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")


def sax_breakpoints(a: int) -> np.ndarray:
    """Standard-normal quantiles at k/a, k = 1..a-1."""
    if not 2 <= a <= 10:
        raise ValueError("alphabet size must lie in [2, 10]")
    return norm.ppf(np.arange(1, a) / a)


def _paa(z: np.ndarray, w: int) -> tuple[np.ndarray, bool]:
    """Piecewise aggregate means; an uneven final segment takes the remainder."""
    n = len(z)
    if w < 1 or w > n:
        raise ValueError("word length must lie in [1, N]")
    if n % w == 0:
        return z.reshape(w, n // w).mean(axis=1), True
    size = n // w
    means = [z[i * size:(i + 1) * size].mean() for i in range(w - 1)]
    means.append(z[(w - 1) * size:].mean())
    return np.array(means), False


def sax_transform(x, w: int, a: int) -> SaxWord:
    z = znormalize_values(_values(x))
    bp = sax_breakpoints(a)
    means, even = _paa(z, w)
    symbols = np.searchsorted(bp, means, side="right")
    return SaxWord(tuple(int(s) for s in symbols), tuple(float(b) for b in bp),
                   n_original=len(z), even_segments=even)


def sax_mindist(word_x: SaxWord, word_y: SaxWord) -> float:
    """MINDIST between two SAX words built with shared parameters."""
    if (word_x.breakpoints != word_y.breakpoints
            or len(word_x.symbols) != len(word_y.symbols)
            or word_x.n_original != word_y.n_original):
        raise ParameterMismatch("SAX words built with different parameters")
    bp = word_x.breakpoints
    total = 0.0
    for r, s in zip(word_x.symbols, word_y.symbols):
        if abs(r - s) <= 1:
            continue
        cell = bp[max(r, s) - 1] - bp[min(r, s)]
        total += cell * cell
    n, w = word_x.n_original, len(word_x.symbols)
    return math.sqrt(n / w) * math.sqrt(total)


def d_sax(x, y, w: int, a: int) -> float:
    xv, yv = _values(x), _values(y)
    require_same_length(xv, yv)
    return sax_mindist(sax_transform(xv, w, a), sax_transform(yv, w, a))


# --- full measure vector ---------------------------------------------------

@dataclass(frozen=True)
class SimilarityParams:
    minkowski_p: float = 3.0
    cor2_beta: float = 1.0
    max_lag: int = 48
    omega: object = "identity"
    sax_w: int | None = None  # None: one symbol per day, capped at 32
    sax_a: int = 4
    znormalize_first: bool = False

    def effective_sax_w(self, n: int) -> int:
        if self.sax_w is not None:
            return self.sax_w
        return max(1, min(n // 24, 32))


@dataclass(frozen=True)
class SimilarityVector:
    values: dict[str, float]
    params: SimilarityParams
    n_points: int
    failures: dict[str, str] = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def csv_header(self) -> list[str]:
        return list(MEASURE_NAMES)

    def csv_row(self) -> list[str]:
        return [repr(self.values[m]) if m in self.values else "" for m in MEASURE_NAMES]


def similarity_vector(x, y, params: SimilarityParams | None = None) -> SimilarityVector:
    """Evaluate every measure; per-measure failures are recorded, not fatal."""
    params = params or SimilarityParams()
    xv, yv = _values(x), _values(y)
    require_same_length(xv, yv)
    if params.znormalize_first:
        xv, yv = znormalize_values(xv), znormalize_values(yv)
    n = len(xv)
    max_lag = min(params.max_lag, max(1, n - 2))
    if max_lag != params.max_lag:
        params = replace(params, max_lag=max_lag)
    w = params.effective_sax_w(n)

    evaluators = {
        "d_euc": lambda: d_lp(xv, yv, 2),
        "d_manhattan": lambda: d_lp(xv, yv, 1),
        "d_linf": lambda: d_lp(xv, yv, math.inf),
        "d_minkowski": lambda: d_lp(xv, yv, params.minkowski_p),
        "d_cor1": lambda: d_cor1(xv, yv),
        "d_cor2": lambda: d_cor2(xv, yv, params.cor2_beta),
        "d_acf": lambda: d_acf(xv, yv, params.max_lag, params.omega),
        "d_per": lambda: d_periodogram(xv, yv, normalized=False),
        "d_per_norm": lambda: d_periodogram(xv, yv, normalized=True),
        "d_sax": lambda: d_sax(xv, yv, w, params.sax_a),
    }
    values: dict[str, float] = {}
    failures: dict[str, str] = {}
    for name, fn in evaluators.items():
        try:
            values[name] = fn()
        except (ZeroVariance, LagTooLarge, ParameterMismatch, ValueError) as exc:
            failures[name] = f"{type(exc).__name__}: {exc}"
    return SimilarityVector(values, params, n_points=n, failures=failures)
