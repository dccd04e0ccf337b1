"""Maximum-likelihood estimation of the mean-reversion rate theta.

Both discretizations of the continuous-record MLE
``theta_hat = -int xi dxi / int xi^2 dt`` are provided: the Ito-sum form
(left endpoint in both sums) and the closed endpoint form
``(1 + xi_0^2/T - xi_T^2/T) / ((2/T) int xi^2 dt)``, which assumes unit
diffusion scale.  Asymptotics: sqrt(T) (theta_hat - theta) -> N(0, 2 theta),
and the iterated-logarithm fluctuation scale sqrt(4 theta log log T / T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ZeroDenominator
from .ou_process import SamplePath

_E = math.e


@dataclass(frozen=True)
class ThetaEstimate:
    """MLE of theta with its building blocks for diagnostics.

    ``theta_hat = numerator / denominator`` for the ito_discrete form; the
    endpoint form stores its own numerator/denominator pair.  A nonpositive
    estimate is representable (flagged via ``nonpositive``); operator
    constructions downstream reject it explicitly.
    """

    theta_hat: float
    t_end: float
    dt: float
    numerator: float
    denominator: float
    form: str  # "ito_discrete" | "endpoint"

    @property
    def nonpositive(self) -> bool:
        return bool(self.theta_hat <= 0.0)


def theta_ito_from_values(values: np.ndarray, dt: float) -> ThetaEstimate:
    """Ito-sum estimate from raw grid values (left-endpoint convention)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise DomainError("need at least two path values")
    left = values[:-1]
    num = -float(np.sum(left * np.diff(values)))
    den = float(np.sum(left * left) * dt)
    if den == 0.0:
        raise ZeroDenominator("sum of squared path values vanishes")
    t_end = (values.size - 1) * dt
    return ThetaEstimate(num / den, t_end, dt, num, den, "ito_discrete")


def theta_endpoint_from_values(values: np.ndarray, dt: float) -> ThetaEstimate:
    """Endpoint-form estimate (1 + xi_0^2/T - xi_T^2/T) / ((2/T) sum xi_i^2 dt)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise DomainError("need at least two path values")
    t_end = (values.size - 1) * dt
    left = values[:-1]
    riemann = float(np.sum(left * left) * dt)
    if riemann == 0.0:
        raise ZeroDenominator("sum of squared path values vanishes")
    num = float(1.0 + values[0] ** 2 / t_end - values[-1] ** 2 / t_end)
    den = 2.0 / t_end * riemann
    return ThetaEstimate(num / den, t_end, dt, num, den, "endpoint")


def estimate_theta_ito(path: SamplePath) -> ThetaEstimate:
    """MLE via Ito sums: -sum xi_i (xi_{i+1} - xi_i) / sum xi_i^2 dt."""
    return theta_ito_from_values(path.values, path.grid.dt)


def estimate_theta_endpoint(path: SamplePath) -> ThetaEstimate:
    """MLE via the endpoint closed form with a left-Riemann integral."""
    return theta_endpoint_from_values(path.values, path.grid.dt)


def asymptotic_std(theta: float, t_end: float) -> float:
    """Asymptotic standard deviation sqrt(2 theta / T) of theta_hat - theta."""
    if not (theta > 0.0 and t_end > 0.0):
        raise DomainError("theta and T must be positive")
    return math.sqrt(2.0 * theta / t_end)


def confidence_band(theta: float, t_end: float, k: float = 3.0) -> tuple[float, float]:
    """Symmetric band +-k sqrt(2 theta / T) around zero for theta_hat - theta."""
    if k < 0.0:
        raise DomainError("k must be nonnegative")
    half = k * asymptotic_std(theta, t_end)
    return -half, half


def lil_envelope(theta: float, t_end: float) -> float:
    """Iterated-logarithm fluctuation scale sqrt(4 theta log(log T) / T), T > e."""
    if not theta > 0.0:
        raise DomainError("theta must be positive")
    if not t_end > _E:
        raise DomainError(f"T must exceed e for log log T > 0, got {t_end}")
    return math.sqrt(4.0 * theta * math.log(math.log(t_end)) / t_end)
