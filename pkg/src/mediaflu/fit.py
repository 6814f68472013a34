"""Least-squares fitting of the epidemic models to windowed weekly data.

Parameters are optimized in reporting coordinates
theta = (R0, latent days, infectious days[, media parameter]) inside a
box, using L-BFGS-B (projected quasi-Newton with limited-memory curvature
pairs and a sufficient-decrease line search) driven by central
finite-difference gradients, restarted from a seeded Latin hypercube.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .epi import (
    DEFAULT_DT,
    MEDIA_KINDS,
    MEDIA_NONE,
    SEEIIR,
    EpiParams,
    MediaFunction,
    integrate,
)
from .errors import (
    FitFailureError,
    InfeasibleInitializationError,
    IntegrationBlowupError,
    MediafluError,
)
from .observe import WeeklySeries, initial_state, weekly_incidence

R0_BOUNDS = (1.0, 2.0)
INV_SIGMA_BOUNDS = (1.0, 3.0)
INV_GAMMA_BOUNDS = (1.0, 5.0)
LINEAR_P_BOUNDS = (0.0, 1.0)
#: Upper bound for the unbounded-in-principle media parameters; historical
#: best fits reach the mid-50s, so 100 leaves ample slack.
P_MAX = 100.0

#: Objective value substituted when the integrator blows up or the initial
#: state is infeasible, large enough that the line search retreats.
PENALTY_VALUE = 1e12

MAX_ITER = 500
GRAD_TOL = 1e-8


@dataclass(frozen=True)
class BoxBounds:
    """Componentwise box for the fit coordinates."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-d and equally long")
        if not np.all(lo < hi):
            raise ValueError("need lo < hi componentwise")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def for_media(cls, media_kind: str) -> "BoxBounds":
        if media_kind not in MEDIA_KINDS:
            raise ValueError(f"unknown media kind {media_kind!r}")
        lo = [R0_BOUNDS[0], INV_SIGMA_BOUNDS[0], INV_GAMMA_BOUNDS[0]]
        hi = [R0_BOUNDS[1], INV_SIGMA_BOUNDS[1], INV_GAMMA_BOUNDS[1]]
        if media_kind != MEDIA_NONE:
            if media_kind == "linear":
                lo.append(LINEAR_P_BOUNDS[0])
                hi.append(LINEAR_P_BOUNDS[1])
            else:
                lo.append(0.0)
                hi.append(P_MAX)
        return cls(np.array(lo), np.array(hi))

    @property
    def dim(self) -> int:
        return self.lo.size

    def contains(self, theta) -> bool:
        t = np.asarray(theta, dtype=float)
        return bool(np.all(t >= self.lo) and np.all(t <= self.hi))

    def clip(self, theta) -> np.ndarray:
        return np.clip(np.asarray(theta, dtype=float), self.lo, self.hi)


@dataclass(frozen=True)
class FitResult:
    """Outcome of one bounded fit (or the best of a multi-start sweep)."""

    theta: np.ndarray
    params: EpiParams
    rss: float
    n: int
    k: int
    converged: bool
    starts_tried: int
    variant: str
    media_kind: str
    message: str = ""

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)
        if self.rss < 0.0:
            raise ValueError("rss must be >= 0")


def theta_to_params(theta, media_kind: str) -> EpiParams:
    """Convert a fit vector to model rates."""
    t = np.asarray(theta, dtype=float)
    if media_kind == MEDIA_NONE:
        media = MediaFunction(MEDIA_NONE)
    else:
        media = MediaFunction(media_kind, float(t[3]))
    return EpiParams.from_natural(float(t[0]), float(t[1]), float(t[2]), media)


def n_fit_params(media_kind: str) -> int:
    """3 fitted parameters for the constant media function, 4 otherwise."""
    return 3 if media_kind == MEDIA_NONE else 4


def fitted_weekly_series(
    theta,
    data: WeeklySeries,
    variant: str = SEEIIR,
    media_kind: str = MEDIA_NONE,
    dt: float = DEFAULT_DT,
) -> np.ndarray:
    """Model weekly series matched to a window of observations.

    The first window value seeds the initial state, so the model's week 0
    is that observation by construction; the integrator predicts the
    remaining weeks.
    """
    obs = data.values
    params = theta_to_params(theta, media_kind)
    init = initial_state(float(obs[0]), params, variant)
    traj = integrate(params, init, 7.0 * len(obs), dt)
    model = weekly_incidence(traj, len(obs))
    model[0] = obs[0]
    return model


def rss_objective(
    theta,
    data: WeeklySeries,
    variant: str = SEEIIR,
    media_kind: str = MEDIA_NONE,
    dt: float = DEFAULT_DT,
) -> float:
    """Sum of squared weekly residuals over the fit window.

    Integrator blowups and infeasible initial states return the penalty
    value instead of raising, so line searches can back off.
    """
    try:
        model = fitted_weekly_series(theta, data, variant, media_kind, dt)
    except (IntegrationBlowupError, InfeasibleInitializationError):
        return PENALTY_VALUE
    resid = model - data.values
    return float(np.dot(resid, resid))


def finite_diff_gradient(objective, theta, h=None, *, bounds: BoxBounds | None = None, with_flags: bool = False):
    """Central-difference gradient, falling back to one-sided at the box edge.

    The default step is 1e-5 of each component's box width (bounds
    required in that case).  With with_flags=True also returns a boolean
    mask marking components where the one-sided fallback was used.
    """
    t = np.asarray(theta, dtype=float)
    if h is None:
        if bounds is None:
            raise ValueError("need bounds to derive the default step")
        steps = 1e-5 * (bounds.hi - bounds.lo)
    else:
        steps = np.broadcast_to(np.asarray(h, dtype=float), t.shape).copy()
    if np.any(steps <= 0.0):
        raise ValueError("steps must be > 0")

    grad = np.empty_like(t)
    one_sided = np.zeros(t.shape, dtype=bool)
    f_center = None
    for i, hi_ in enumerate(steps):
        up = t.copy()
        dn = t.copy()
        up[i] += hi_
        dn[i] -= hi_
        can_up = bounds is None or up[i] <= bounds.hi[i]
        can_dn = bounds is None or dn[i] >= bounds.lo[i]
        if can_up and can_dn:
            grad[i] = (objective(up) - objective(dn)) / (2.0 * hi_)
        elif can_up:
            if f_center is None:
                f_center = objective(t)
            grad[i] = (objective(up) - f_center) / hi_
            one_sided[i] = True
        elif can_dn:
            if f_center is None:
                f_center = objective(t)
            grad[i] = (f_center - objective(dn)) / hi_
            one_sided[i] = True
        else:
            raise ValueError(f"step {hi_} exceeds the box width in component {i}")
    if with_flags:
        return grad, one_sided
    return grad


def bounded_fit(
    data: WeeklySeries,
    variant: str = SEEIIR,
    media_kind: str = MEDIA_NONE,
    start=None,
    *,
    bounds: BoxBounds | None = None,
    dt: float = DEFAULT_DT,
    max_iter: int = MAX_ITER,
    callback=None,
) -> FitResult:
    """Projected quasi-Newton descent from one start point.

    Uses L-BFGS-B over the box with finite-difference gradients.  The
    returned theta is clipped to the box exactly and is the best point
    seen across every objective evaluation, so a failed line search still
    yields the best iterate (with converged=False).  callback, if given,
    receives each accepted iterate.
    """
    if bounds is None:
        bounds = BoxBounds.for_media(media_kind)
    if start is None:
        start = 0.5 * (bounds.lo + bounds.hi)
    theta0 = np.asarray(start, dtype=float)
    if theta0.shape != bounds.lo.shape:
        raise ValueError("start has the wrong dimension")
    if not bounds.contains(theta0):
        raise ValueError("start must lie within the bounds")

    tracker = {"theta": theta0.copy(), "f": math.inf, "penalties": 0}

    def obj(theta):
        value = rss_objective(theta, data, variant, media_kind, dt)
        if value >= PENALTY_VALUE:
            tracker["penalties"] += 1
        if value < tracker["f"]:
            tracker["f"] = value
            tracker["theta"] = np.array(theta, dtype=float)
        return value

    def jac(theta):
        return finite_diff_gradient(obj, theta, bounds=bounds)

    res = minimize(
        obj,
        theta0,
        jac=jac,
        method="L-BFGS-B",
        bounds=list(zip(bounds.lo, bounds.hi)),
        callback=callback,
        options={"maxiter": max_iter, "ftol": 1e-14, "gtol": GRAD_TOL, "maxls": 60},
    )

    theta = bounds.clip(tracker["theta"])
    rss = tracker["f"]
    if not np.array_equal(theta, tracker["theta"]):
        rss = rss_objective(theta, data, variant, media_kind, dt)
    message = str(res.message)
    if tracker["penalties"]:
        message += f" [{tracker['penalties']} penalty evaluations]"
    return FitResult(
        theta=theta,
        params=theta_to_params(theta, media_kind),
        rss=float(rss),
        n=len(data),
        k=n_fit_params(media_kind),
        converged=bool(res.success),
        starts_tried=1,
        variant=variant,
        media_kind=media_kind,
        message=message,
    )


def latin_hypercube(bounds: BoxBounds, n: int, seed: int) -> np.ndarray:
    """n seeded Latin-hypercube points inside the box, one stratum per row."""
    if n < 1:
        raise ValueError("need n >= 1")
    rng = np.random.default_rng(seed)
    pts = np.empty((n, bounds.dim))
    for j in range(bounds.dim):
        strata = (rng.permutation(n) + rng.random(n)) / n
        pts[:, j] = bounds.lo[j] + strata * (bounds.hi[j] - bounds.lo[j])
    return pts


def multi_start_fit(
    data: WeeklySeries,
    variant: str = SEEIIR,
    media_kind: str = MEDIA_NONE,
    n_starts: int = 20,
    seed: int = 42,
    *,
    bounds: BoxBounds | None = None,
    dt: float = DEFAULT_DT,
    max_iter: int = MAX_ITER,
    threads: int = 1,
) -> FitResult:
    """Best-of-n bounded fits from a seeded Latin hypercube.

    Starts are independent; with threads > 1 they run concurrently.  The
    winner is the minimum-rss result, ties resolved by the lowest start
    index, so the outcome does not depend on scheduling.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    if bounds is None:
        bounds = BoxBounds.for_media(media_kind)
    starts = latin_hypercube(bounds, n_starts, seed)

    def run(idx):
        try:
            return idx, bounded_fit(
                data, variant, media_kind, starts[idx],
                bounds=bounds, dt=dt, max_iter=max_iter,
            ), None
        except MediafluError as exc:
            return idx, None, exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run, range(n_starts)))
    else:
        outcomes = [run(i) for i in range(n_starts)]

    best = None
    best_key = None
    failures = []
    for idx, result, exc in outcomes:
        if result is None:
            failures.append((idx, repr(exc)))
            continue
        key = (result.rss, idx)
        if best_key is None or key < best_key:
            best_key = key
            best = result
    if best is None:
        raise FitFailureError(
            f"all {n_starts} starts failed for {variant}:{media_kind}",
            diagnostics=failures,
        )
    return FitResult(
        theta=best.theta,
        params=best.params,
        rss=best.rss,
        n=best.n,
        k=best.k,
        converged=best.converged,
        starts_tried=n_starts,
        variant=variant,
        media_kind=media_kind,
        message=best.message,
    )
