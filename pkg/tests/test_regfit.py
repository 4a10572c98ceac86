import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from tcaging.curves import HAZARD, RatePoint, RateSeries
from tcaging.regfit import (
    FitError,
    _ols,
    exponential_model,
    fit_exponential,
    fit_polynomial,
    fit_report,
    half_life,
    polynomial_model,
    predict,
)

DEN = 10**9


def series(ages, rates, flags=None):
    flags = flags or [False] * len(ages)
    return RateSeries(
        HAZARD,
        tuple(RatePoint(int(a), int(round(r * DEN)), DEN, f) for a, r, f in zip(ages, rates, flags)),
    )


def exact_normal_equations(xs, ys, degree):
    """Solve X'X b = X'y in rationals by Gauss-Jordan elimination."""
    p = degree + 1
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    A = [[sum(x ** (i + j) for x in xs) for j in range(p)] + [sum(y * x**i for x, y in zip(xs, ys))] for i in range(p)]
    for c in range(p):
        piv = next(r for r in range(c, p) if A[r][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        A[c] = [v / A[c][c] for v in A[c]]
        for r in range(p):
            if r != c and A[r][c] != 0:
                A[r] = [a - A[r][c] * b for a, b in zip(A[r], A[c])]
    return [A[i][p] for i in range(p)]


def noisy(ages, coeffs, sd, seed):
    rng = np.random.default_rng(seed)
    t = np.asarray(ages, dtype=float)
    y = sum(c * t**i for i, c in enumerate(coeffs))
    return np.clip(y + rng.normal(0, sd, len(t)), 0, 1)


class TestPolynomial:
    @pytest.mark.parametrize(
        "coeffs",
        [(0.2, -3e-4), (0.15, -5e-4, 5e-7), (0.1, -2e-4, 8e-7, -1e-9)],
    )
    def test_exact_recovery(self, coeffs):
        t = np.arange(501.0)
        y = sum(c * t**i for i, c in enumerate(coeffs))
        model = fit_polynomial(_exact_series(t, y), len(coeffs) - 1)
        assert np.allclose(predict(model, t), y, atol=1e-9, rtol=0)
        for got, want in zip(model.coefficients, coeffs):
            assert got == pytest.approx(want, rel=1e-6, abs=1e-12)
        assert model.residual_std_error < 1e-9

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.sampled_from([1, 2, 3]), st.integers(12, 60))
    def test_matches_exact_oracle(self, seed, degree, n):
        rng = np.random.default_rng(seed)
        ages = np.sort(rng.choice(400, n, replace=False))
        rates = rng.integers(0, 200, n) / 1000
        model = fit_polynomial(series(ages, rates), degree)
        want = exact_normal_equations(ages.tolist(), [Fraction(int(r * 1000), 1000) for r in rates], degree)
        pred = predict(model, ages.astype(float))
        ref = [float(sum(c * Fraction(int(a)) ** i for i, c in enumerate(want))) for a in ages]
        assert np.allclose(pred, ref, atol=1e-8, rtol=0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.sampled_from([1, 2, 3]))
    def test_residuals_orthogonal_to_design(self, seed, degree):
        rng = np.random.default_rng(seed)
        x = np.sort(rng.choice(1000, 80, replace=False)).astype(float)
        y = rng.uniform(0, 0.3, 80)
        fit = _ols(x, y, degree)
        assert np.abs(fit.design.T @ fit.residuals).max() < 1e-8

    def test_nested_rss(self):
        ages = np.arange(0, 400, 2)
        s = series(ages, noisy(ages, (0.15, -5e-4, 6e-7), 0.02, 1))
        rss = [fit_polynomial(s, d).rss for d in (1, 2, 3)]
        assert rss[0] >= rss[1] >= rss[2]

    def test_p_values_match_student_t(self):
        ages = np.arange(0, 300, 3)
        s = series(ages, noisy(ages, (0.12, -2e-4), 0.03, 4))
        model = fit_polynomial(s, 2)
        df = model.n - 3
        for cs in model.coefficient_stats:
            assert cs.t_value == pytest.approx(cs.estimate / cs.std_error)
            assert cs.p_value == pytest.approx(2 * stats.t.sf(abs(cs.t_value), df), rel=1e-9, abs=1e-300)

    def test_standard_errors_match_textbook(self):
        ages = np.arange(0, 200, 4)
        s = series(ages, noisy(ages, (0.1, -1e-4), 0.01, 9))
        model = fit_polynomial(s, 1)
        x, y = s.ages(), s.rates()
        X = np.column_stack([np.ones_like(x), x])
        beta = np.linalg.solve(X.T @ X, X.T @ y)
        resid = y - X @ beta
        sigma2 = resid @ resid / (len(x) - 2)
        se = np.sqrt(np.diag(sigma2 * np.linalg.inv(X.T @ X)))
        assert model.residual_std_error == pytest.approx(math.sqrt(sigma2), rel=1e-9)
        assert [c.std_error for c in model.coefficient_stats] == pytest.approx(se.tolist(), rel=1e-7)

    def test_low_support_excluded(self):
        s = series([0, 1, 2, 3, 4], [0.5, 0.4, 0.3, 0.9, 0.1], [False, False, False, True, False])
        model = fit_polynomial(s, 1)
        assert model.n == 4

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_polynomial(series([0, 1], [0.1, 0.2]), 1)
        with pytest.raises(FitError):
            fit_polynomial(series([0, 1, 2, 3], [0.1, 0.2, 0.1, 0.3]), 3)

    def test_single_age_rank_deficient(self):
        s = RateSeries(HAZARD, tuple(RatePoint(5, i, 10) for i in range(4)))
        with pytest.raises(FitError):
            fit_polynomial(s, 1)

    def test_bad_degree(self):
        with pytest.raises(FitError):
            fit_polynomial(series(range(10), [0.1] * 10), 4)

    def test_formula(self):
        assert polynomial_model([0.114, -0.0001]).formula() == "0.114 - 0.0001*t"
        assert polynomial_model([0.145, -0.0002, 9e-8]).formula(True) == "14.5 - 0.02*t + 9e-06*t^2"


def _exact_series(t, y):
    # denominators of 2**40 keep the rates exact to well below 1e-9
    den = 2**40
    return RateSeries(HAZARD, tuple(RatePoint(int(a), int(round(v * den)), den) for a, v in zip(t, y)))


class TestExponential:
    def test_recovery(self):
        t = np.arange(0, 400.0)
        s = _exact_series(t, 0.2 * np.exp(-0.01 * t))
        model = fit_exponential(s)
        a, b = model.coefficients
        assert a == pytest.approx(0.2, rel=1e-6) and b == pytest.approx(-0.01, rel=1e-6)
        assert model.log_scale and model.excluded == 0

    def test_zeros_excluded(self):
        ages = list(range(10))
        rates = [0.2 * math.exp(-0.1 * a) if a % 3 else 0.0 for a in ages]
        model = fit_exponential(series(ages, rates))
        assert model.excluded == 4 and model.n == 6
        assert model.coefficients[1] == pytest.approx(-0.1, rel=1e-6)

    def test_needs_positive_rates(self):
        with pytest.raises(FitError):
            fit_exponential(series(range(5), [0, 0, 0.1, 0, 0.2]))


class TestPredict:
    def test_reference_linear_intercept(self):
        assert predict(polynomial_model([0.114, -0.0001]), 0) == pytest.approx(0.114, abs=1e-12)

    def test_reference_quadratic(self):
        assert predict(polynomial_model([0.145, -0.0002, 9e-8]), 100) == pytest.approx(0.1259, abs=1e-12)

    def test_array(self):
        out = predict(exponential_model(0.2, -0.01), [0, 100])
        assert out == pytest.approx([0.2, 0.2 * math.exp(-1)])


class TestHalfLife:
    def test_reference_linear(self):
        hl = half_life(polynomial_model([0.114, -0.0001]))
        assert hl.days == 570 and hl.months == 19.0

    def test_exponential_closed_form(self):
        for b in (0.01, 0.0037, 0.05):
            assert half_life(exponential_model(0.3, -b)).days == math.ceil(math.log(2) / b)

    def test_constant_never_halves(self):
        hl = half_life(polynomial_model([0.1, 0.0]), 1000)
        assert hl.days is None and hl.months is None and hl.grid_max == 1000

    def test_grid_limit(self):
        assert half_life(polynomial_model([0.114, -0.0001]), 500).days is None

    def test_nonpositive_start(self):
        with pytest.raises(FitError):
            half_life(polynomial_model([0.0, 0.001]))

    @settings(max_examples=100)
    @given(st.floats(0.01, 0.5), st.floats(1e-5, 1e-2))
    def test_bracketing(self, a, b):
        model = polynomial_model([a, -b * a])
        hl = half_life(model, 10**5)
        d = hl.days
        assert predict(model, d) <= a / 2
        assert d == 0 or predict(model, d - 1) > a / 2


class TestReport:
    def test_families_and_flags(self):
        ages = np.arange(0, 500, 2)
        s = series(ages, noisy(ages, (0.14, -2.5e-4), 0.01, 2))
        reports = fit_report(s, ["quadratic", 1, "exponential"])
        assert [r.model.name for r in reports] == ["linear", "quadratic", "exponential"]
        lin = reports[0]
        assert lin.weak_coefficients == ()
        assert lin.half_life.days == pytest.approx(280, rel=0.05)
        d = lin.as_dict(percent=True)
        assert d["scale"] == "percent" and d["half_life_days"] == lin.half_life.days

    def test_weak_coefficient_flagged(self):
        ages = np.arange(0, 100)
        s = series(ages, noisy(ages, (0.1,), 0.01, 5))
        (rep,) = fit_report(s, ["linear"], p_threshold=1e-10)
        assert 1 in rep.weak_coefficients

    def test_growing_model_has_note(self):
        ages = np.arange(10, 60)
        s = series(ages, 0.001 * (ages - 10))
        (rep,) = fit_report(s, ["linear"])
        assert rep.half_life is None and "positive initial" in rep.note

    def test_unknown_family(self):
        with pytest.raises(FitError):
            fit_report(series(range(10), [0.1] * 10), ["weibull"])
