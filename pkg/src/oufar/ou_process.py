"""Ornstein-Uhlenbeck process: parameters, exact moments, and path samplers.

The process solves the Langevin equation

    d xi_t = theta * (mu - xi_t) dt + sigma dW_t,    theta, sigma > 0,

and is stationary Gaussian with mean ``mu`` and covariance
``sigma^2/(2 theta) * exp(-theta |t - s|)``.  Two samplers are provided: the
Euler-Maruyama discretization (the scheme used by the Monte Carlo harness)
and the exact Gaussian transition (used as a distributional oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError, GridMismatch

SCHEMES = ("euler", "exact")


@dataclass(frozen=True)
class OuParams:
    """Drift/scale parameters (theta, mu, sigma), theta and sigma positive."""

    theta: float
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not (self.theta > 0.0) or not math.isfinite(self.theta):
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu}")

    @property
    def stationary_variance(self) -> float:
        return self.sigma**2 / (2.0 * self.theta)

    @property
    def stationary_std(self) -> float:
        return math.sqrt(self.stationary_variance)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid on [0, t_end] with step dt; t_end/dt must be integral.

    The ratio t_end/dt has to round to an integer within 1e-9 relative
    tolerance, otherwise the constructor raises GridMismatch.  The grid
    stores n_steps + 1 nodes, both endpoints included.
    """

    t_end: float
    dt: float
    n_steps: int = field(init=False)

    def __post_init__(self):
        if not (self.t_end > 0.0) or not (self.dt > 0.0):
            raise GridMismatch(f"t_end and dt must be positive, got {self.t_end}, {self.dt}")
        ratio = self.t_end / self.dt
        n = int(round(ratio))
        if n < 1 or abs(ratio - n) > 1e-9 * max(ratio, 1.0):
            raise GridMismatch(f"t_end={self.t_end} is not an integer multiple of dt={self.dt}")
        object.__setattr__(self, "n_steps", n)

    def times(self) -> np.ndarray:
        return np.arange(self.n_steps + 1) * self.dt


@dataclass(eq=False)
class SamplePath:
    """Discretized trajectory on a TimeGrid, first value at t=0."""

    grid: TimeGrid
    values: np.ndarray
    params: OuParams | None
    scheme: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_steps + 1,):
            raise GridMismatch(
                f"path needs {self.grid.n_steps + 1} values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("path values must be finite")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")


def stationary_density(params: OuParams, x):
    """Stationary probability density sqrt(theta/(pi sigma^2)) exp(-theta (x-mu)^2/sigma^2).

    This is the N(mu, sigma^2/(2 theta)) density; it integrates to one.
    """
    x = np.asarray(x, dtype=float)
    z = np.sqrt(params.theta / (math.pi * params.sigma**2))
    out = z * np.exp(-params.theta * (x - params.mu) ** 2 / params.sigma**2)
    return out if out.ndim else float(out)


def covariance(params: OuParams, t, s):
    """Stationary covariance sigma^2/(2 theta) * exp(-theta |t - s|)."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    out = params.stationary_variance * np.exp(-params.theta * np.abs(t - s))
    return out if out.ndim else float(out)


def conditional_moments(params: OuParams, c: float, t: float, s: float):
    """Mean and covariance of (xi_t, xi_s) given xi_0 = c, for t, s >= 0.

    Returns ``(mean_t, cov_ts)`` with

        mean_t = mu + exp(-theta t) (c - mu)
        cov_ts = sigma^2/(2 theta) exp(-theta |t-s|) + (c^2 - 2 c mu + mu^2) exp(-theta (s+t))
    """
    if t < 0.0 or s < 0.0:
        raise DomainError("conditional moments require t, s >= 0")
    th, mu = params.theta, params.mu
    mean_t = mu + math.exp(-th * t) * (c - mu)
    cov_ts = params.stationary_variance * math.exp(-th * abs(t - s)) + (
        c * c - 2.0 * c * mu + mu * mu
    ) * math.exp(-th * (s + t))
    return mean_t, cov_ts


def gaussian_tail_bound(sigma: float, x):
    """Upper bound exp(-x^2/(2 sigma^2)) for P(|N(0, sigma^2)| >= x), x >= 0."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise DomainError("tail bound requires x >= 0")
    out = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return out if out.ndim else float(out)


def _ar1_path(x0: float, a: float, u: np.ndarray) -> np.ndarray:
    """Values of xi_{i+1} = a xi_i + u_i, prepended with xi_0 = x0.

    lfilter with b=[1], a=[1, -a] runs exactly this recursion in C, one
    multiply and one add per step, so the result is bit-identical to the
    plain Python loop.
    """
    driven = lfilter([1.0], [1.0, -a], u, zi=np.array([a * x0]))[0]
    return np.concatenate(([x0], driven))


def sample_euler(
    params: OuParams,
    grid: TimeGrid,
    rng: np.random.Generator,
    x0: float = 0.0,
    _zero_noise: bool = False,
) -> SamplePath:
    """Euler-Maruyama path: xi_{i+1} = xi_i - theta (xi_i - mu) dt + sigma dW_i.

    The increments dW_i are i.i.d. N(0, dt), drawn in one block from ``rng``;
    the same seed therefore reproduces the same path byte for byte.
    ``_zero_noise`` suppresses the increments to expose the drift skeleton
    (testing only, not reachable from the CLI).
    """
    n, dt = grid.n_steps, grid.dt
    if _zero_noise:
        dw = np.zeros(n)
    else:
        dw = rng.standard_normal(n) * math.sqrt(dt)
    a = 1.0 - params.theta * dt
    u = params.theta * params.mu * dt + params.sigma * dw
    return SamplePath(grid=grid, values=_ar1_path(x0, a, u), params=params, scheme="euler")


def exact_transition(params: OuParams, dt: float) -> tuple[float, float]:
    """One-step coefficients of the exact transition over a step of length dt.

    Returns ``(decay, innovation_sd)`` such that
    xi_{t+dt} = mu + decay * (xi_t - mu) + innovation_sd * Z with Z ~ N(0,1).
    At dt = 0 this degenerates to (1, 0): the state passes through unchanged.
    """
    if dt < 0.0:
        raise DomainError("step length must be nonnegative")
    decay = math.exp(-params.theta * dt)
    var = params.sigma**2 * (1.0 - math.exp(-2.0 * params.theta * dt)) / (2.0 * params.theta)
    return decay, math.sqrt(max(var, 0.0))


def sample_exact(
    params: OuParams,
    grid: TimeGrid,
    rng: np.random.Generator,
    x0: float = 0.0,
    stationary: bool = False,
    _zero_noise: bool = False,
) -> SamplePath:
    """Path drawn from the exact Gaussian transition of the process.

    With ``stationary=True`` the initial state is drawn from the stationary
    law N(mu, sigma^2/(2 theta)) before the innovation block, so the whole
    path is a stationary Gaussian sequence.  Otherwise the path starts at
    ``x0``.  Deterministic given the seeded ``rng``.
    """
    n = grid.n_steps
    decay, sd = exact_transition(params, grid.dt)
    if stationary:
        x0 = params.mu + params.stationary_std * rng.standard_normal()
    if _zero_noise:
        eta = np.zeros(n)
    else:
        eta = rng.standard_normal(n) * sd
    u = params.mu * (1.0 - decay) + eta
    return SamplePath(grid=grid, values=_ar1_path(float(x0), decay, u), params=params, scheme="exact")
