"""Compartmental influenza models with media-modified transmission.

Two deterministic variants are supported: a six-compartment model with
Erlang-2 latent and infectious stages (S, E1, E2, I1, I2, R) and the
plain four-compartment S, E, I, R model.  Transmission is scaled by a
media function f(I) in [0, 1] that decreases with total prevalence.
All quantities are population proportions and all rates are per day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit

from .errors import (
    IntegrationBlowupError,
    EmptyInputError,
    ModelVariantError,
    ParameterDomainError,
)

SEEIIR = "seeiir"
SEIR = "seir"
VARIANTS = (SEEIIR, SEIR)

MEDIA_NONE = "none"
MEDIA_LINEAR = "linear"
MEDIA_EXPONENTIAL = "exponential"
MEDIA_INVERSE_QUADRATIC = "inverse_quadratic"
MEDIA_INVERSE_LINEAR = "inverse_linear"

#: Canonical ordering used by reports: constant model first, then the
#: linear proposal, then the three forms from earlier studies.
MEDIA_KINDS = (
    MEDIA_NONE,
    MEDIA_LINEAR,
    MEDIA_EXPONENTIAL,
    MEDIA_INVERSE_QUADRATIC,
    MEDIA_INVERSE_LINEAR,
)

_KIND_CODES = {kind: code for code, kind in enumerate(MEDIA_KINDS)}

_COMPARTMENTS = {SEEIIR: ("s", "e1", "e2", "i1", "i2", "r"), SEIR: ("s", "e", "i", "r")}

#: Tolerances shared by state validation and the integrator.
SUM_TOL = 1e-9
NEG_FLOOR = -1e-12
RENORM_TOL = 1e-12

DEFAULT_DT = 0.1


@dataclass(frozen=True)
class MediaFunction:
    """Multiplicative transmission modifier, one of five functional forms.

    kind      one of MEDIA_KINDS
    param     nonnegative; the linear form additionally requires param <= 1
              so that 1 - param*I stays in [0, 1] for proportions.
    """

    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise ParameterDomainError(f"unknown media kind {self.kind!r}")
        p = float(self.param)
        if not math.isfinite(p) or p < 0.0:
            raise ParameterDomainError(f"media param must be finite and >= 0, got {p}")
        if self.kind == MEDIA_LINEAR and p > 1.0:
            raise ParameterDomainError(f"linear media param must be <= 1, got {p}")
        object.__setattr__(self, "param", p)

    @property
    def code(self) -> int:
        return _KIND_CODES[self.kind]

    def __call__(self, i_total: float) -> float:
        return media_eval(self, i_total)


NO_MEDIA = MediaFunction(MEDIA_NONE)


def media_eval(f: MediaFunction, i_total: float) -> float:
    """Evaluate the media function at total prevalence i_total in [0, 1].

    Returns 1 for the constant form, 1 - p*I, exp(-p*I), 1/(1 + p*I^2) or
    1/(1 + p*I) otherwise, clamped into [0, 1].
    """
    i = float(i_total)
    if not 0.0 <= i <= 1.0:
        raise ValueError(f"prevalence must be in [0, 1], got {i}")
    return _media_kernel(f.code, f.param, i)


@njit(cache=True, nogil=True)
def _media_kernel(code: int, p: float, i: float) -> float:
    if i < 0.0:
        i = 0.0
    if code == 0:
        return 1.0
    if code == 1:
        v = 1.0 - p * i
    elif code == 2:
        v = math.exp(-p * i)
    elif code == 3:
        v = 1.0 / (1.0 + p * i * i)
    else:
        v = 1.0 / (1.0 + p * i)
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


@dataclass(frozen=True)
class EpiParams:
    """Transmission, latency and recovery rates plus the media function.

    beta, sigma and gamma are per-day rates; 1/sigma is the mean latent
    period and 1/gamma the mean infectious period.  R0 = beta/gamma and is
    unaffected by the media function because f(0) = 1.
    """

    beta: float
    sigma: float
    gamma: float
    media: MediaFunction = NO_MEDIA

    def __post_init__(self):
        for name in ("beta", "sigma", "gamma"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterDomainError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.beta < 0.0:
            raise ParameterDomainError(f"beta must be >= 0, got {self.beta}")
        if self.sigma <= 0.0 or self.gamma <= 0.0:
            raise ParameterDomainError("sigma and gamma must be > 0")

    def r0(self) -> float:
        return self.beta / self.gamma

    @classmethod
    def from_natural(
        cls,
        r0: float,
        inv_sigma_days: float,
        inv_gamma_days: float,
        media: MediaFunction = NO_MEDIA,
    ) -> "EpiParams":
        """Build from the reporting coordinates (R0, latent days, infectious days)."""
        if inv_sigma_days <= 0.0 or inv_gamma_days <= 0.0:
            raise ParameterDomainError("period lengths must be > 0")
        gamma = 1.0 / inv_gamma_days
        sigma = 1.0 / inv_sigma_days
        return cls(beta=r0 * gamma, sigma=sigma, gamma=gamma, media=media)


@dataclass(frozen=True)
class CompartmentState:
    """Population proportions for one variant, summing to 1.

    Tiny negative round-off (down to -1e-12) is clamped to zero; anything
    more negative, or a sum off by more than 1e-9, is rejected.
    """

    variant: str
    values: tuple

    def __post_init__(self):
        if self.variant not in _COMPARTMENTS:
            raise ModelVariantError(f"unknown variant {self.variant!r}")
        names = _COMPARTMENTS[self.variant]
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(names):
            raise ModelVariantError(
                f"{self.variant} needs {len(names)} compartments, got {len(vals)}"
            )
        total = 0.0
        clamped = []
        for name, v in zip(names, vals):
            if not math.isfinite(v):
                raise ParameterDomainError(f"compartment {name} is not finite")
            if v < NEG_FLOOR:
                raise ParameterDomainError(f"compartment {name} = {v} below {NEG_FLOOR}")
            total += v
            clamped.append(0.0 if v < 0.0 else v)
        if abs(total - 1.0) > SUM_TOL:
            raise ParameterDomainError(f"compartments sum to {total}, not 1")
        object.__setattr__(self, "values", tuple(clamped))

    @classmethod
    def seeiir(cls, s, e1, e2, i1, i2, r) -> "CompartmentState":
        return cls(SEEIIR, (s, e1, e2, i1, i2, r))

    @classmethod
    def seir(cls, s, e, i, r) -> "CompartmentState":
        return cls(SEIR, (s, e, i, r))

    @property
    def s(self) -> float:
        return self.values[0]

    @property
    def r(self) -> float:
        return self.values[-1]

    @property
    def i_total(self) -> float:
        if self.variant == SEEIIR:
            return self.values[3] + self.values[4]
        return self.values[2]

    @property
    def e_total(self) -> float:
        if self.variant == SEEIIR:
            return self.values[1] + self.values[2]
        return self.values[1]

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)


@dataclass(frozen=True)
class Trajectory:
    """Fixed-step solution: states every dt days plus cumulative onsets.

    `states` has one row per step (including the initial state) and one
    column per compartment.  `cumulative_onsets` accumulates the flow into
    the first infectious compartment and is non-decreasing.
    """

    t0: float
    dt: float
    variant: str
    states: np.ndarray
    cumulative_onsets: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        onsets = np.asarray(self.cumulative_onsets, dtype=float)
        if states.ndim != 2 or states.shape[0] == 0:
            raise EmptyInputError("trajectory needs at least one state")
        if states.shape[1] != len(_COMPARTMENTS[self.variant]):
            raise ModelVariantError("state width does not match variant")
        if onsets.shape != (states.shape[0],):
            raise ValueError("cumulative_onsets length must match states")
        if np.any(np.diff(onsets) < -1e-12):
            raise ValueError("cumulative_onsets must be non-decreasing")
        states.setflags(write=False)
        onsets.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "cumulative_onsets", onsets)

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def end_time(self) -> float:
        return self.t0 + self.dt * (len(self) - 1)

    def state(self, idx: int) -> CompartmentState:
        return CompartmentState(self.variant, tuple(self.states[idx]))

    @property
    def s(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def r(self) -> np.ndarray:
        return self.states[:, -1]

    @property
    def i_total(self) -> np.ndarray:
        if self.variant == SEEIIR:
            return self.states[:, 3] + self.states[:, 4]
        return self.states[:, 2]

    @property
    def e_total(self) -> np.ndarray:
        if self.variant == SEEIIR:
            return self.states[:, 1] + self.states[:, 2]
        return self.states[:, 1]


def rhs_seeiir(params: EpiParams, state: CompartmentState) -> np.ndarray:
    """Time derivative of the six-compartment state.

    The Erlang-2 stages use doubled rates (2*sigma, 2*gamma) so the mean
    latent and infectious periods stay 1/sigma and 1/gamma.  Components
    sum to zero: the system conserves the population.
    """
    if state.variant != SEEIIR:
        raise ModelVariantError("rhs_seeiir needs a SEEIIR state")
    s, e1, e2, i1, i2, _ = state.values
    i_tot = i1 + i2
    foi = params.beta * _media_kernel(params.media.code, params.media.param, i_tot) * s * i_tot
    ts = 2.0 * params.sigma
    tg = 2.0 * params.gamma
    return np.array(
        [
            -foi,
            foi - ts * e1,
            ts * e1 - ts * e2,
            ts * e2 - tg * i1,
            tg * i1 - tg * i2,
            tg * i2,
        ]
    )


def rhs_seir(params: EpiParams, state: CompartmentState) -> np.ndarray:
    """Time derivative of the plain SEIR state (single latent/infectious stage)."""
    if state.variant != SEIR:
        raise ModelVariantError("rhs_seir needs a SEIR state")
    s, e, i, _ = state.values
    foi = params.beta * _media_kernel(params.media.code, params.media.param, i) * s * i
    return np.array([-foi, foi - params.sigma * e, params.sigma * e - params.gamma * i, params.gamma * i])


def onset_flow(params: EpiParams, state: CompartmentState) -> float:
    """Instantaneous flow into the first infectious compartment."""
    if state.variant == SEEIIR:
        return 2.0 * params.sigma * state.values[2]
    return params.sigma * state.values[1]


@njit(cache=True, nogil=True)
def _integrate_seeiir_kernel(beta, sigma, gamma, code, p, y0, n_steps, dt, out):
    s = y0[0]
    e1 = y0[1]
    e2 = y0[2]
    i1 = y0[3]
    i2 = y0[4]
    r = y0[5]
    c = y0[6]
    out[0, 0] = s
    out[0, 1] = e1
    out[0, 2] = e2
    out[0, 3] = i1
    out[0, 4] = i2
    out[0, 5] = r
    out[0, 6] = c
    ts = 2.0 * sigma
    tg = 2.0 * gamma
    h2 = 0.5 * dt
    for n in range(n_steps):
        it = i1 + i2
        foi = beta * _media_kernel(code, p, it) * s * (it if it > 0.0 else 0.0)
        k1s = -foi
        k1a = foi - ts * e1
        k1b = ts * e1 - ts * e2
        k1c = ts * e2 - tg * i1
        k1d = tg * i1 - tg * i2
        k1r = tg * i2
        k1o = ts * e2

        s2 = s + h2 * k1s
        a2 = e1 + h2 * k1a
        b2 = e2 + h2 * k1b
        c2 = i1 + h2 * k1c
        d2 = i2 + h2 * k1d
        it = c2 + d2
        foi = beta * _media_kernel(code, p, it) * s2 * (it if it > 0.0 else 0.0)
        k2s = -foi
        k2a = foi - ts * a2
        k2b = ts * a2 - ts * b2
        k2c = ts * b2 - tg * c2
        k2d = tg * c2 - tg * d2
        k2r = tg * d2
        k2o = ts * b2

        s3 = s + h2 * k2s
        a3 = e1 + h2 * k2a
        b3 = e2 + h2 * k2b
        c3 = i1 + h2 * k2c
        d3 = i2 + h2 * k2d
        it = c3 + d3
        foi = beta * _media_kernel(code, p, it) * s3 * (it if it > 0.0 else 0.0)
        k3s = -foi
        k3a = foi - ts * a3
        k3b = ts * a3 - ts * b3
        k3c = ts * b3 - tg * c3
        k3d = tg * c3 - tg * d3
        k3r = tg * d3
        k3o = ts * b3

        s4 = s + dt * k3s
        a4 = e1 + dt * k3a
        b4 = e2 + dt * k3b
        c4 = i1 + dt * k3c
        d4 = i2 + dt * k3d
        it = c4 + d4
        foi = beta * _media_kernel(code, p, it) * s4 * (it if it > 0.0 else 0.0)
        k4s = -foi
        k4a = foi - ts * a4
        k4b = ts * a4 - ts * b4
        k4c = ts * b4 - tg * c4
        k4d = tg * c4 - tg * d4
        k4r = tg * d4
        k4o = ts * b4

        w = dt / 6.0
        s += w * (k1s + 2.0 * (k2s + k3s) + k4s)
        e1 += w * (k1a + 2.0 * (k2a + k3a) + k4a)
        e2 += w * (k1b + 2.0 * (k2b + k3b) + k4b)
        i1 += w * (k1c + 2.0 * (k2c + k3c) + k4c)
        i2 += w * (k1d + 2.0 * (k2d + k3d) + k4d)
        r += w * (k1r + 2.0 * (k2r + k3r) + k4r)
        c += w * (k1o + 2.0 * (k2o + k3o) + k4o)

        total = s + e1 + e2 + i1 + i2 + r
        if not (total == total and -1e300 < total < 1e300):
            return n + 1
        # RK4 conserves the population sum, so divergence can hide behind
        # a clean total; bound the component magnitudes as well
        if s * s + e1 * e1 + e2 * e2 + i1 * i1 + i2 * i2 + r * r > 100.0:
            return n + 1
        drift = total - 1.0
        if drift > 1e-6 or drift < -1e-6:
            return n + 1
        if drift > 1e-12 or drift < -1e-12:
            inv = 1.0 / total
            s *= inv
            e1 *= inv
            e2 *= inv
            i1 *= inv
            i2 *= inv
            r *= inv
        m = n + 1
        out[m, 0] = s
        out[m, 1] = e1
        out[m, 2] = e2
        out[m, 3] = i1
        out[m, 4] = i2
        out[m, 5] = r
        out[m, 6] = c
    return -1


@njit(cache=True, nogil=True)
def _integrate_seir_kernel(beta, sigma, gamma, code, p, y0, n_steps, dt, out):
    s = y0[0]
    e = y0[1]
    i = y0[2]
    r = y0[3]
    c = y0[4]
    out[0, 0] = s
    out[0, 1] = e
    out[0, 2] = i
    out[0, 3] = r
    out[0, 4] = c
    h2 = 0.5 * dt
    for n in range(n_steps):
        foi = beta * _media_kernel(code, p, i) * s * (i if i > 0.0 else 0.0)
        k1s = -foi
        k1e = foi - sigma * e
        k1i = sigma * e - gamma * i
        k1r = gamma * i
        k1o = sigma * e

        s2 = s + h2 * k1s
        e2 = e + h2 * k1e
        i2 = i + h2 * k1i
        foi = beta * _media_kernel(code, p, i2) * s2 * (i2 if i2 > 0.0 else 0.0)
        k2s = -foi
        k2e = foi - sigma * e2
        k2i = sigma * e2 - gamma * i2
        k2r = gamma * i2
        k2o = sigma * e2

        s3 = s + h2 * k2s
        e3 = e + h2 * k2e
        i3 = i + h2 * k2i
        foi = beta * _media_kernel(code, p, i3) * s3 * (i3 if i3 > 0.0 else 0.0)
        k3s = -foi
        k3e = foi - sigma * e3
        k3i = sigma * e3 - gamma * i3
        k3r = gamma * i3
        k3o = sigma * e3

        s4 = s + dt * k3s
        e4 = e + dt * k3e
        i4 = i + dt * k3i
        foi = beta * _media_kernel(code, p, i4) * s4 * (i4 if i4 > 0.0 else 0.0)
        k4s = -foi
        k4e = foi - sigma * e4
        k4i = sigma * e4 - gamma * i4
        k4r = gamma * i4
        k4o = sigma * e4

        w = dt / 6.0
        s += w * (k1s + 2.0 * (k2s + k3s) + k4s)
        e += w * (k1e + 2.0 * (k2e + k3e) + k4e)
        i += w * (k1i + 2.0 * (k2i + k3i) + k4i)
        r += w * (k1r + 2.0 * (k2r + k3r) + k4r)
        c += w * (k1o + 2.0 * (k2o + k3o) + k4o)

        total = s + e + i + r
        if not (total == total and -1e300 < total < 1e300):
            return n + 1
        if s * s + e * e + i * i + r * r > 100.0:
            return n + 1
        drift = total - 1.0
        if drift > 1e-6 or drift < -1e-6:
            return n + 1
        if drift > 1e-12 or drift < -1e-12:
            inv = 1.0 / total
            s *= inv
            e *= inv
            i *= inv
            r *= inv
        m = n + 1
        out[m, 0] = s
        out[m, 1] = e
        out[m, 2] = i
        out[m, 3] = r
        out[m, 4] = c
    return -1


def integrate(
    params: EpiParams,
    init: CompartmentState,
    t_end: float,
    dt: float = DEFAULT_DT,
) -> Trajectory:
    """Solve the model with classic fixed-step fourth-order Runge-Kutta.

    Runs round(t_end/dt) steps of size dt from t=0.  Cumulative onsets are
    accumulated through the same quadrature as the states.  Each state is
    renormalized to sum 1 whenever round-off drift exceeds 1e-12.

    Raises IntegrationBlowupError (with the step index) if a non-finite
    state appears.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if t_end < dt:
        raise ValueError(f"t_end must be >= dt, got {t_end}")
    n_steps = int(round(t_end / dt))
    if n_steps * dt < t_end - 1e-9:
        n_steps += 1

    dim = len(init.values)
    y0 = np.empty(dim + 1)
    y0[:dim] = init.values
    y0[dim] = 0.0
    out = np.empty((n_steps + 1, dim + 1))
    kernel = _integrate_seeiir_kernel if init.variant == SEEIIR else _integrate_seir_kernel
    bad = kernel(
        params.beta,
        params.sigma,
        params.gamma,
        params.media.code,
        params.media.param,
        y0,
        n_steps,
        dt,
        out,
    )
    if bad >= 0:
        raise IntegrationBlowupError(bad)
    return Trajectory(
        t0=0.0,
        dt=dt,
        variant=init.variant,
        states=out[:, :dim],
        cumulative_onsets=out[:, dim],
    )


class FinalSize(NamedTuple):
    """Recovered proportion at the end of a run; converged is False while
    the epidemic is still active (I >= 1e-6 at the last step)."""

    value: float
    converged: bool


def final_size(traj: Trajectory) -> FinalSize:
    """Final epidemic size: the recovered proportion at the last state."""
    last = traj.states[-1]
    if traj.variant == SEEIIR:
        i_tot = last[3] + last[4]
    else:
        i_tot = last[2]
    return FinalSize(value=float(last[-1]), converged=bool(i_tot < 1e-6))


def peak_of(series: Sequence[float]) -> tuple[int, float]:
    """Index and value of the maximum, earliest index on ties."""
    arr = np.asarray(series, dtype=float)
    if arr.size == 0:
        raise EmptyInputError("cannot take the peak of an empty series")
    idx = int(np.argmax(arr))
    return idx, float(arr[idx])
