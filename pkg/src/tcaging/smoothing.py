"""Local polynomial (loess-style) smoothing of rate series with pointwise bands.

Each input age gets its own weighted least-squares polynomial fit over its
``k`` nearest neighbours, ``k = max(degree + 2, ceil(span * n))``, weighted by
the tricube kernel on distance scaled to the farthest neighbour. The fitted
value at ``x0`` is a linear combination ``l(x0) . y`` of the responses, and the
band is ``fitted +/- z * sigma * ||l(x0)||`` with ``sigma**2`` the mean squared
residual of the smooth. No robustness iterations are done.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import IO

import numpy as np

from .curves import RateSeries

KERNELS = ("tricube", "uniform")

BAND_NOTE = "pointwise normal band from the smoother's equivalent kernel"


@dataclass(frozen=True)
class SmoothConfig:
    span: float = 0.15
    degree: int = 1
    confidence: float = 0.95
    kernel: str = "tricube"

    def __post_init__(self):
        if not 0 < self.span <= 1:
            raise ValueError("span must be in (0, 1]")
        if self.degree not in (1, 2):
            raise ValueError("local degree must be 1 or 2")
        if not 0 < self.confidence < 1:
            raise ValueError("confidence must be in (0, 1)")
        if self.kernel not in KERNELS:
            raise ValueError(f"kernel must be one of {KERNELS}")

    def window_size(self, n: int) -> int:
        return min(n, max(self.degree + 2, math.ceil(self.span * n)))


@dataclass(frozen=True)
class SmoothPoint:
    age_days: float
    fitted: float
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class SmoothedCurve:
    points: tuple[SmoothPoint, ...]
    sigma: float
    window: int
    config: SmoothConfig

    def fitted(self) -> np.ndarray:
        return np.array([p.fitted for p in self.points])


def _window(x: np.ndarray, i: int, k: int) -> tuple[int, int]:
    """Half-open index range of the k points nearest x[i] (x sorted).

    Grows one point at a time toward the closer side; ties go to the smaller x.
    """
    lo, hi = i, i + 1
    n = len(x)
    while hi - lo < k:
        if lo == 0:
            hi += 1
        elif hi == n:
            lo -= 1
        elif x[i] - x[lo - 1] <= x[hi] - x[i]:
            lo -= 1
        else:
            hi += 1
    return lo, hi


def _kernel(u: np.ndarray, kind: str) -> np.ndarray:
    if kind == "uniform":
        return np.ones_like(u)
    return np.clip(1 - u**3, 0, None) ** 3


def equivalent_kernels(x: np.ndarray, config: SmoothConfig) -> np.ndarray:
    """Smoother matrix S with fitted = S @ y for abscissae ``x`` (sorted)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    k = config.window_size(n)
    S = np.zeros((n, n))
    for i in range(n):
        lo, hi = _window(x, i, k)
        dx = x[lo:hi] - x[i]
        dmax = np.abs(dx).max()
        if dmax == 0:
            S[i, lo:hi] = 1.0 / (hi - lo)
            continue
        u = dx / dmax
        sw = np.sqrt(_kernel(np.abs(u), config.kernel))
        X = np.vander(u, config.degree + 1, increasing=True)
        # minimum-norm solve: windows whose outer points get zero weight may be
        # rank deficient, and then the fit interpolates the weighted points
        S[i, lo:hi] = np.linalg.pinv(sw[:, None] * X)[0] * sw
    return S


def smooth(series: RateSeries, config: SmoothConfig = SmoothConfig()) -> SmoothedCurve:
    """Smooth the supported (not low-support) points of ``series``."""
    pts = series.supported()
    x, y = pts.ages(), pts.rates()
    if len(x) < config.degree + 2:
        raise ValueError(
            f"smoothing needs at least {config.degree + 2} supported points, got {len(x)}"
        )
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    S = equivalent_kernels(x, config)
    fitted = S @ y
    sigma = math.sqrt(float(np.mean((y - fitted) ** 2)))
    z = NormalDist().inv_cdf(0.5 + config.confidence / 2)
    half = z * sigma * np.linalg.norm(S, axis=1)
    points = tuple(
        SmoothPoint(float(a), float(f), float(f - h), float(f + h))
        for a, f, h in zip(x, fitted, half)
    )
    return SmoothedCurve(points, sigma, config.window_size(len(x)), config)


def write_smooth_csv(curve: SmoothedCurve, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["age_days", "fitted", "ci_low", "ci_high"])
    for p in curve.points:
        writer.writerow([int(p.age_days), repr(p.fitted), repr(p.ci_low), repr(p.ci_high)])
