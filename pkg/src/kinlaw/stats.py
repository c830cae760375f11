"""Statistics on fitted power-law parameters.

Student-t and F tail probabilities come from a regularized incomplete beta
function evaluated by continued fraction, so no statistics tables or
distribution libraries are involved.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    InsufficientReplication,
    RankDeficient,
    TooFewRows,
    TooFewValues,
    UnbalancedDesign,
)

_EPS = 1e-16
_TINY = 1e-300


# --- distributions ----------------------------------------------------------

def _beta_cf(a, b, x, tol=1e-15, max_iter=10000):
    # modified Lentz evaluation of the incomplete beta continued fraction
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularized incomplete beta function ``I_x(a, b)``."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_cdf(t, dof):
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * betainc(dof / 2.0, 0.5, dof / (dof + t * t))
    return 1.0 - tail if t > 0 else tail


def t_sf_two_sided(t, dof):
    """Two-sided p-value ``P(|T| >= |t|)``."""
    if math.isnan(t):
        return float("nan")
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(dof / 2.0, 0.5, dof / (dof + t * t)))


def t_ppf(q, dof):
    """Quantile of the Student-t distribution, by root finding on :func:`t_cdf`."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must be in (0, 1)")
    if q == 0.5:
        return 0.0
    hi = 1.0
    while t_cdf(hi, dof) < max(q, 1.0 - q):
        hi *= 2.0
    root = brentq(lambda t: t_cdf(t, dof) - max(q, 1.0 - q), 0.0, hi, xtol=1e-14, rtol=1e-15)
    return root if q > 0.5 else -root


def f_sf(f, dof1, dof2):
    """Upper tail ``P(F >= f)`` of the F distribution."""
    if math.isinf(f):
        return 0.0
    if f <= 0.0:
        return 1.0
    return betainc(dof2 / 2.0, dof1 / 2.0, dof2 / (dof2 + dof1 * f))


# --- results ----------------------------------------------------------------

@dataclass(frozen=True)
class Coefficient:
    estimate: float
    std_error: float
    statistic: float
    p_value: float
    dof: int
    ci_low: float = float("nan")
    ci_high: float = float("nan")


@dataclass(frozen=True)
class StatResult:
    """Outcome of one statistical procedure.

    ``kind`` is one of ``"ols"``, ``"rm_regression"``, ``"rm_anova"`` or
    ``"mean_ci"``. ANOVA-style results fill ``f_stat``, ``p_value`` and the
    ``dof`` pair; regressions fill ``coefficients`` (and an overall F test).
    """

    kind: str
    coefficients: dict = field(default_factory=dict)
    f_stat: Optional[float] = None
    p_value: Optional[float] = None
    dof: Optional[tuple] = None
    r2: Optional[float] = None
    ci_level: float = 0.95
    n: int = 0


@dataclass(frozen=True)
class TrialRecord:
    """Fitted parameters of one trial (or one segment of a trial) plus metadata."""

    subject_id: str
    condition: str
    segment: str
    alpha: float
    beta: float
    gamma: Optional[float]
    r2: float
    grs: Optional[float] = None
    trial_id: str = ""

    def __post_init__(self):
        if self.grs is not None and not 5 <= self.grs <= 30:
            raise ValueError(f"GRS must lie in [5, 30], got {self.grs}")


# --- procedures -------------------------------------------------------------

def mean_ci(values, level=0.95):
    """Mean with a Student-t confidence interval: ``(mean, low, high)``."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        raise TooFewValues(f"need at least 2 values, got {n}")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    half = t_ppf((1.0 + level) / 2.0, n - 1) * sd / math.sqrt(n)
    return mean, mean - half, mean + half


def _t_test(estimate, se, dof):
    if se > 0:
        stat = estimate / se
    elif estimate == 0:
        stat = 0.0
    else:
        stat = math.copysign(math.inf, estimate)
    return stat, t_sf_two_sided(stat, dof)


def _least_squares(y, design, names, level):
    n, p = design.shape
    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10 * max(diag.max(), 1.0):
        raise RankDeficient(f"design matrix is rank deficient ({p} columns)")
    coef = np.linalg.solve(r, q.T @ y)
    resid = y - design @ coef
    rss = float(resid @ resid)
    dof = n - p
    sigma2 = rss / dof
    r_inv = np.linalg.inv(r)
    se = np.sqrt(sigma2 * np.sum(r_inv * r_inv, axis=1))
    tq = t_ppf((1.0 + level) / 2.0, dof)
    coefficients = {}
    for name, b, s in zip(names, coef, se):
        stat, p_val = _t_test(float(b), float(s), dof)
        coefficients[name] = Coefficient(float(b), float(s), stat, p_val, dof,
                                         float(b - tq * s), float(b + tq * s))
    return coefficients, rss, dof


def ols(y, x, names=None, level=0.95) -> StatResult:
    """Ordinary least squares with an intercept and two-sided t tests.

    ``x`` is a sequence of regressor values (one regressor) or of regressor
    rows. Coefficients are named ``"intercept"`` and ``names`` (default
    ``x1, x2, ...``). The overall F test of all slopes is also reported.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, p = x.shape
    if len(y) != n:
        raise ValueError("y and x have different row counts")
    if n < p + 2:
        raise TooFewRows(f"need at least {p + 2} rows for {p} regressor(s), got {n}")
    names = list(names) if names is not None else [f"x{i + 1}" for i in range(p)]
    design = np.column_stack([np.ones(n), x])
    coefficients, rss, dof = _least_squares(y, design, ["intercept"] + names, level)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    ssr = tss - rss
    if rss > 0:
        f_stat = (ssr / p) / (rss / dof)
        p_val = f_sf(f_stat, p, dof)
    else:
        f_stat, p_val = (math.inf, 0.0) if ssr > 0 else (0.0, 1.0)
    return StatResult("ols", coefficients, f_stat, p_val, (p, dof), r2, level, n)


def _value(record, response):
    value = getattr(record, response)
    if value is None:
        raise ValueError(f"record {record} has no {response}")
    return float(value)


def rm_regression(records, response, predictor="grs", level=0.95) -> StatResult:
    """Common-slope regression with one intercept per subject.

    The slope coefficient is named after ``predictor``; intercepts are named
    ``intercept[<subject>]``. ``f_stat`` is the squared slope t statistic with
    ``dof = (1, N - subjects - 1)``.
    """
    by_subject = defaultdict(list)
    for rec in records:
        by_subject[rec.subject_id].append(rec)
    if len(by_subject) < 2:
        raise InsufficientReplication(f"need at least 2 subjects, got {len(by_subject)}")
    thin = [s for s, recs in by_subject.items() if len(recs) < 2]
    if thin:
        raise InsufficientReplication(f"subjects with fewer than 2 trials: {', '.join(map(str, thin))}")

    subjects = sorted(by_subject)
    rows, y = [], []
    for j, subj in enumerate(subjects):
        for rec in by_subject[subj]:
            dummies = [0.0] * len(subjects)
            dummies[j] = 1.0
            rows.append(dummies + [_value(rec, predictor)])
            y.append(_value(rec, response))
    design = np.array(rows)
    names = [f"intercept[{s}]" for s in subjects] + [predictor]
    coefficients, rss, dof = _least_squares(np.array(y), design, names, level)
    slope = coefficients[predictor]
    f_stat = slope.statistic ** 2
    return StatResult("rm_regression", coefficients, f_stat, slope.p_value, (1, dof), None, level, len(y))


def rm_anova_matrix(values) -> StatResult:
    """One-way repeated-measures ANOVA on a ``subjects x levels`` table.

    ``F = MS_levels / MS_(levels x subjects)`` with ``(k - 1, (k - 1)(n - 1))``
    degrees of freedom. A zero level effect gives ``F = 0, p = 1``; a nonzero
    effect with zero error gives ``F = inf, p = 0``.
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 2:
        raise ValueError("values must be a 2D subjects x levels table")
    n, k = x.shape
    if n < 2 or k < 2:
        raise TooFewValues(f"need at least 2 subjects and 2 levels, got {n} x {k}")
    grand = x.mean()
    subj_means = x.mean(axis=1, keepdims=True)
    level_means = x.mean(axis=0, keepdims=True)
    ss_total = float(np.sum((x - grand) ** 2))
    ss_levels = float(n * np.sum((level_means - grand) ** 2))
    ss_error = float(np.sum((x - subj_means - level_means + grand) ** 2))
    dof = (k - 1, (k - 1) * (n - 1))
    scale = max(ss_total, float(np.sum(x * x)), _TINY)
    if ss_levels <= 1e-24 * scale:
        f_stat, p_val = 0.0, 1.0
    elif ss_error <= 1e-24 * scale:
        f_stat, p_val = math.inf, 0.0
    else:
        f_stat = (ss_levels / dof[0]) / (ss_error / dof[1])
        p_val = f_sf(f_stat, *dof)
    return StatResult("rm_anova", {}, f_stat, p_val, dof, None, 0.95, n * k)


def rm_anova_1way(records, response, factor="segment") -> StatResult:
    """Repeated-measures ANOVA of ``response`` across levels of ``factor``.

    Repetitions of a subject/level cell are averaged first. Every subject must
    have every level.
    """
    cells = defaultdict(list)
    for rec in records:
        cells[(rec.subject_id, getattr(rec, factor))].append(_value(rec, response))
    subjects = sorted({s for s, _ in cells})
    levels = sorted({lvl for _, lvl in cells})
    missing = [(s, lvl) for s in subjects for lvl in levels if (s, lvl) not in cells]
    if missing:
        raise UnbalancedDesign(missing)
    table = [[np.mean(cells[(s, lvl)]) for lvl in levels] for s in subjects]
    return rm_anova_matrix(table)


def bonferroni(p, m):
    """Bonferroni-adjusted p-value ``min(1, m * p)``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    if m < 1:
        raise ValueError("m must be a positive integer")
    return min(1.0, m * p)


def cell_summaries(records, response, by=("condition", "segment"), level=0.95):
    """Mean and confidence interval of ``response`` within each cell of ``by``.

    Returns a list of dicts ordered by cell key. Cells with a single value get
    NaN interval bounds.
    """
    cells = defaultdict(list)
    for rec in records:
        value = getattr(rec, response)
        if value is not None:
            cells[tuple(getattr(rec, b) for b in by)].append(float(value))
    rows = []
    for key in sorted(cells):
        vals = cells[key]
        if len(vals) >= 2:
            mean, lo, hi = mean_ci(vals, level)
        else:
            mean, lo, hi = vals[0], float("nan"), float("nan")
        rows.append({**dict(zip(by, key)), "parameter": response, "n": len(vals),
                     "mean": mean, "ci_low": lo, "ci_high": hi})
    return rows
