"""Decay models for hazard series: polynomial and exponential fits, half-life.

Rates are fractions throughout; ``percent=True`` on the formatting helpers only
changes presentation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import betainc

from .curves import RateSeries

POLY_NAMES = {1: "linear", 2: "quadratic", 3: "cubic"}
FAMILY_DEGREES = {v: k for k, v in POLY_NAMES.items()}
DEFAULT_GRID_MAX = 3650
DEFAULT_P_THRESHOLD = 1e-10
DAYS_PER_MONTH = 30


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class CoefStat:
    estimate: float
    std_error: float
    t_value: float
    p_value: float


@dataclass(frozen=True)
class FitModel:
    """A fitted decay model.

    Polynomial coefficients are in the raw age basis, constant term first.
    Exponential models ``a * exp(b * t)`` store ``(a, b)``; their statistics
    and residual standard error refer to the log-linear fit of ``ln(rate)``.
    """

    family: str
    degree: int
    coefficients: tuple[float, ...]
    n: int
    residual_std_error: float
    coefficient_stats: tuple[CoefStat, ...]
    log_scale: bool = False
    excluded: int = 0
    residuals: tuple[float, ...] = field(default=(), repr=False, compare=False)

    @property
    def name(self) -> str:
        if self.family == "exponential":
            return "exponential"
        return POLY_NAMES.get(self.degree, f"degree-{self.degree}")

    @property
    def rss(self) -> float:
        return float(sum(r * r for r in self.residuals))

    def formula(self, percent: bool = False) -> str:
        scale = 100.0 if percent else 1.0
        if self.family == "exponential":
            a, b = self.coefficients
            return f"{a * scale:.6g}*exp({b:.6g}*t)"
        terms = []
        for i, c in enumerate(self.coefficients):
            c *= scale
            mag = f"{abs(c):.6g}"
            body = mag if i == 0 else f"{mag}*t" if i == 1 else f"{mag}*t^{i}"
            if not terms:
                terms.append(body if c >= 0 else f"-{body}")
            else:
                terms.append(("+ " if c >= 0 else "- ") + body)
        return " ".join(terms)


@dataclass(frozen=True)
class HalfLife:
    """First whole day at which the model is at or below half its day-0 value.

    ``days`` is None when that never happens on ``[0, grid_max]``.
    """

    days: int | None
    initial_rate: float
    grid_max: int

    @property
    def months(self) -> float | None:
        return None if self.days is None else self.days / DAYS_PER_MONTH


def _t_pvalue(t: np.ndarray, df: int) -> np.ndarray:
    # two-sided P(|T| > |t|) = I_{df/(df+t^2)}(df/2, 1/2)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = df / (df + t * t)
    return betainc(df / 2.0, 0.5, x)


def _basis_change(center: float, scale: float, p: int) -> np.ndarray:
    """Matrix T with raw = T @ scaled for polynomials in u = (t - center) / scale."""
    T = np.zeros((p, p))
    for j in range(p):
        for i in range(j + 1):
            T[i, j] = math.comb(j, i) * (-center) ** (j - i) / scale**j
    return T


@dataclass(frozen=True)
class _Ols:
    coef: np.ndarray
    cov: np.ndarray
    residuals: np.ndarray
    sigma: float
    design: np.ndarray


def _ols(x: np.ndarray, y: np.ndarray, degree: int) -> _Ols:
    n, p = len(x), degree + 1
    if n <= p:
        raise FitError(f"{POLY_NAMES.get(degree, degree)} fit needs more than {p} points, got {n}")
    center = float(np.mean(x))
    scale = float(np.max(np.abs(x - center)))
    if scale == 0:
        raise FitError("rank-deficient design: all ages are equal")
    U = np.vander((x - center) / scale, p, increasing=True)
    Q, R = np.linalg.qr(U)
    diag = np.abs(np.diag(R))
    if diag.min() <= 1e-12 * diag.max():
        raise FitError("rank-deficient design")
    beta_u = solve_triangular(R, Q.T @ y)
    resid = y - U @ beta_u
    sigma2 = float(resid @ resid) / (n - p)
    Rinv = solve_triangular(R, np.eye(p))
    T = _basis_change(center, scale, p)
    cov = T @ (sigma2 * Rinv @ Rinv.T) @ T.T
    return _Ols(T @ beta_u, cov, resid, math.sqrt(sigma2), U)


def _stats(coef: np.ndarray, cov: np.ndarray, df: int) -> tuple[CoefStat, ...]:
    se = np.sqrt(np.clip(np.diag(cov), 0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = coef / se
    p = _t_pvalue(t, df)
    return tuple(CoefStat(float(b), float(s), float(tv), float(pv)) for b, s, tv, pv in zip(coef, se, t, p))


def fit_polynomial(series: RateSeries, degree: int) -> FitModel:
    """Least-squares polynomial in age over the supported points of ``series``."""
    if degree not in POLY_NAMES:
        raise FitError("polynomial degree must be 1, 2 or 3")
    pts = series.supported()
    x, y = pts.ages(), pts.rates()
    fit = _ols(x, y, degree)
    return FitModel(
        "polynomial",
        degree,
        tuple(float(c) for c in fit.coef),
        len(x),
        fit.sigma,
        _stats(fit.coef, fit.cov, len(x) - degree - 1),
        residuals=tuple(fit.residuals.tolist()),
    )


def fit_exponential(series: RateSeries) -> FitModel:
    """Fit ``a * exp(b * t)`` by regressing ``ln(rate)`` on age.

    Points with a zero rate cannot enter the log fit and are counted in
    ``excluded``.
    """
    pts = series.supported()
    x, y = pts.ages(), pts.rates()
    pos = y > 0
    if pos.sum() < 3:
        raise FitError(f"exponential fit needs at least 3 positive rates, got {int(pos.sum())}")
    fit = _ols(x[pos], np.log(y[pos]), 1)
    ln_a, b = fit.coef
    return FitModel(
        "exponential",
        1,
        (math.exp(ln_a), float(b)),
        int(pos.sum()),
        fit.sigma,
        _stats(fit.coef, fit.cov, int(pos.sum()) - 2),
        log_scale=True,
        excluded=int((~pos).sum()),
        residuals=tuple(fit.residuals.tolist()),
    )


def predict(model: FitModel, t):
    """Model value at age ``t`` (scalar or array), unclamped."""
    t = np.asarray(t, dtype=float)
    if model.family == "exponential":
        a, b = model.coefficients
        out = a * np.exp(b * t)
    else:
        out = np.zeros_like(t)
        for c in reversed(model.coefficients):
            out = out * t + c
    return float(out) if out.ndim == 0 else out


def half_life(model: FitModel, grid_max: int = DEFAULT_GRID_MAX) -> HalfLife:
    """Scan whole days 0..grid_max for the first value <= half the day-0 value.

    Values are clamped at zero for the scan, so a model that crosses zero
    counts as having decayed.
    """
    initial = predict(model, 0.0)
    if not initial > 0:
        raise FitError(f"half-life needs a positive initial rate, got {initial}")
    grid = np.arange(grid_max + 1, dtype=float)
    below = np.flatnonzero(np.maximum(predict(model, grid), 0.0) <= initial / 2)
    days = int(below[0]) if below.size else None
    return HalfLife(days, initial, grid_max)


@dataclass(frozen=True)
class ModelReport:
    model: FitModel
    half_life: HalfLife | None
    weak_coefficients: tuple[int, ...]
    note: str = ""

    def as_dict(self, percent: bool = False) -> dict:
        m = self.model
        hl = self.half_life
        return {
            "model": m.name,
            "formula": m.formula(percent),
            "scale": "percent" if percent else "fraction",
            "coefficients": list(m.coefficients),
            "n": m.n,
            "residual_std_error": m.residual_std_error,
            "residual_scale": "log" if m.log_scale else "rate",
            "excluded_points": m.excluded,
            "coefficient_stats": [
                {"estimate": s.estimate, "std_error": s.std_error, "t_value": s.t_value, "p_value": s.p_value}
                for s in m.coefficient_stats
            ],
            "weak_coefficients": list(self.weak_coefficients),
            "half_life_days": None if hl is None else hl.days,
            "half_life_months": None if hl is None else hl.months,
            "note": self.note,
        }


def _family_list(families: Iterable) -> list[str]:
    names = []
    for f in families:
        if isinstance(f, int):
            f = POLY_NAMES.get(f, str(f))
        if f not in FAMILY_DEGREES and f != "exponential":
            raise FitError(f"unknown model family {f!r}")
        names.append(f)
    order = ["linear", "quadratic", "cubic", "exponential"]
    return sorted(set(names), key=order.index)


def fit_report(
    series: RateSeries,
    families: Iterable = ("linear", "quadratic"),
    grid_max: int = DEFAULT_GRID_MAX,
    p_threshold: float = DEFAULT_P_THRESHOLD,
) -> list[ModelReport]:
    """Fit each requested family and attach its half-life.

    ``weak_coefficients`` lists the indices of coefficients whose p-value is
    not below ``p_threshold``.
    """
    reports = []
    for name in _family_list(families):
        if name == "exponential":
            model = fit_exponential(series)
        else:
            model = fit_polynomial(series, FAMILY_DEGREES[name])
        weak = tuple(i for i, s in enumerate(model.coefficient_stats) if not s.p_value < p_threshold)
        try:
            hl, note = half_life(model, grid_max), ""
        except FitError as exc:
            hl, note = None, str(exc)
        reports.append(ModelReport(model, hl, weak, note))
    return reports


def polynomial_model(coefficients: Sequence[float]) -> FitModel:
    """A bare polynomial model (no fit statistics) for evaluating known formulas."""
    coefficients = tuple(float(c) for c in coefficients)
    return FitModel("polynomial", len(coefficients) - 1, coefficients, 0, float("nan"), ())


def exponential_model(a: float, b: float) -> FitModel:
    return FitModel("exponential", 1, (float(a), float(b)), 0, float("nan"), ())
