"""Regression analyses linking media engagement to influenza activity.

Covers the correlation between weekly retweet proportions and ILI
percentages, linear-versus-quadratic least-squares comparison by AICc,
and the trend of quadratic preference against season severity.
Student-t tail probabilities come from the regularized incomplete beta
function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .errors import EmptyInputError, RankDeficiencyError, UndefinedCorrelationError
from .selection import aicc, akaike_weights

#: Floor applied to an exactly-zero rss before scoring, so that perfect
#: fits of both degrees are ranked purely by the parameter-count penalty.
_RSS_FLOOR = 1e-300


@dataclass(frozen=True)
class PairedSeries:
    """Weekly (ILI percentage, retweet proportion) pairs for one season."""

    season: str
    ili: np.ndarray
    retweets: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.ili, dtype=float)
        y = np.asarray(self.retweets, dtype=float)
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("ili and retweets must be 1-d and equally long")
        if x.size < 3:
            raise ValueError("need at least 3 paired observations")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("paired values must be finite")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "ili", x)
        object.__setattr__(self, "retweets", y)

    def __len__(self) -> int:
        return self.ili.size

    def swapped(self) -> "PairedSeries":
        """Same pairs with the regression direction reversed."""
        return PairedSeries(self.season, self.retweets.copy(), self.ili.copy())


@dataclass(frozen=True)
class RegressionFit:
    """Polynomial least-squares fit with intercept.

    coefficients are in ascending powers.  Residuals (observed minus
    fitted) sum to zero because the intercept is always included.
    """

    degree: int
    coefficients: np.ndarray
    rss: float
    n: int
    aicc: float
    residuals: np.ndarray

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        res = np.asarray(self.residuals, dtype=float)
        if coef.size != self.degree + 1:
            raise ValueError("coefficient count must be degree + 1")
        if res.size != self.n:
            raise ValueError("residual count must equal n")
        scale = max(1.0, float(np.abs(res).max(initial=0.0)) * self.n)
        if abs(float(res.sum())) > 1e-9 * scale:
            raise ValueError("residuals do not sum to zero")
        coef.setflags(write=False)
        res.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "residuals", res)

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return sum(c * x**p for p, c in enumerate(self.coefficients))


def student_t_sf2(t: float, dof: int) -> float:
    """Two-sided Student-t tail probability P(|T| >= t)."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    t2 = float(t) * float(t)
    if math.isinf(t2):
        return 0.0
    return float(betainc(dof / 2.0, 0.5, dof / (dof + t2)))


def pearson(x, y) -> tuple[float, float]:
    """Sample correlation and its two-sided p-value.

    The test statistic r*sqrt((n-2)/(1-r^2)) is referred to a Student-t
    distribution with n-2 degrees of freedom.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("x and y must be 1-d and equally long")
    n = xa.size
    if n < 3:
        raise ValueError("need at least 3 points")
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance in one of the inputs")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    if abs(r) == 1.0:
        return r, 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return r, student_t_sf2(t, n - 2)


def ols_fit(x, y, degree: int) -> RegressionFit:
    """Least-squares polynomial with intercept, solved by SVD.

    Raises RankDeficiencyError when the design matrix loses rank (for
    example a quadratic through fewer than three distinct x values).  An
    exactly-zero rss is floored at a representable minimum before AICc so
    the criterion stays finite.
    """
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValueError("x and y must be 1-d and equally long")
    if degree not in (1, 2):
        raise ValueError("degree must be 1 or 2")
    n = xa.size
    if n < degree + 2:
        raise EmptyInputError(f"need at least {degree + 2} points for degree {degree}")
    design = np.vander(xa, degree + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(design, ya, rcond=None)
    if rank < degree + 1:
        raise RankDeficiencyError(
            f"design matrix rank {rank} < {degree + 1}; too few distinct x values"
        )
    fitted = design @ coef
    residuals = ya - fitted
    rss = float(np.dot(residuals, residuals))
    # rss at the round-off level is a perfect fit in disguise; snap it to
    # the floor so degree comparisons fall back to the parameter penalty.
    roundoff = n * (1e-12 * max(1.0, float(np.abs(ya).max()))) ** 2
    effective = rss if rss > roundoff else _RSS_FLOOR
    score = aicc(effective, n, degree + 1)
    return RegressionFit(
        degree=degree,
        coefficients=coef,
        rss=rss,
        n=n,
        aicc=score,
        residuals=residuals,
    )


def lin_vs_quad(x, y) -> tuple[float, float]:
    """Akaike weights (p_lin, p_quad) comparing degree 1 and 2 fits."""
    xa = np.asarray(x, dtype=float)
    if xa.size < 5:
        raise EmptyInputError("need at least 5 points to compare the models")
    lin = ols_fit(x, y, 1)
    quad = ols_fit(x, y, 2)
    w = akaike_weights([lin.aicc, quad.aicc])
    return float(w[0]), float(w[1])


@dataclass(frozen=True)
class SeverityTrend:
    """Quadratic-model preference against season severity.

    points holds (season, total_ili, p_quad) per season; slope is the
    degree-1 least-squares trend of p_quad on total ILI.
    """

    points: tuple
    slope: float


def quad_weight_vs_severity(seasons) -> SeverityTrend:
    """Relate each season's quadratic Akaike weight to its total ILI."""
    seasons = list(seasons)
    if len(seasons) < 2:
        raise EmptyInputError("need at least 2 seasons for a trend")
    points = []
    for ps in seasons:
        total = float(ps.ili.sum())
        _, p_quad = lin_vs_quad(ps.ili, ps.retweets)
        points.append((ps.season, total, p_quad))
    totals = np.array([p[1] for p in points])
    quads = np.array([p[2] for p in points])
    if np.all(totals == totals[0]):
        slope = 0.0
    elif len(points) == 2:
        slope = float((quads[1] - quads[0]) / (totals[1] - totals[0]))
    else:
        design = np.vander(totals, 2, increasing=True)
        coef, _, _, _ = np.linalg.lstsq(design, quads, rcond=None)
        slope = float(coef[1])
    return SeverityTrend(points=tuple(points), slope=slope)


def residual_series(fit: RegressionFit) -> np.ndarray:
    """Residuals in input order, for plotting or CSV emission."""
    return np.array(fit.residuals, dtype=float)
