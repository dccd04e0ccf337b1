"""Functional layer: path segmentation, norms, and the autocorrelation operator.

A path on [0, T] is cut into blocks X_n(t) = xi_{nh + t}, 0 <= t <= h.  The
blocks form an autoregression X_n = rho_theta(X_{n-1}) + eps_n driven by the
rank-one operator (rho_theta x)(t) = exp(-theta t) x(h).  Two norms are used:

* ``h_norm``: sqrt(int_0^h f^2 dt + f(h)^2), the L2 norm under Lebesgue
  measure plus a unit point mass at the right endpoint.  The atom is carried
  by the final grid node and added outside the quadrature sum.
* ``b_norm``: the supremum norm over the nodes.

Closed-form operator norms and operator distances come with brute-force
discrete oracles so every formula is checked by an independent route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc

from .errors import DomainError, GridMismatch
from .ou_process import SamplePath


@dataclass(frozen=True)
class SegmentGrid:
    """Nodes j*h/m, j = 0..m, on [0, h]; the last node carries the unit atom."""

    h: float
    m: int

    def __post_init__(self):
        if not (self.h > 0.0):
            raise GridMismatch(f"segment length must be positive, got {self.h}")
        if self.m < 1:
            raise GridMismatch(f"need at least one subdivision, got m={self.m}")

    @property
    def dt(self) -> float:
        return self.h / self.m

    def times(self) -> np.ndarray:
        return np.arange(self.m + 1) * (self.h / self.m)


@dataclass(eq=False)
class FunctionalSegment:
    """One functional block: m+1 node values, final entry is the value at h."""

    grid: SegmentGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.m + 1,):
            raise GridMismatch(
                f"segment needs {self.grid.m + 1} values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("segment values must be finite")

    @property
    def end_value(self) -> float:
        """f(h), the coordinate the autocorrelation operator acts through."""
        return float(self.values[-1])


def _check_same_grid(a: SegmentGrid, b: SegmentGrid) -> None:
    if a.h != b.h or a.m != b.m:
        raise GridMismatch(f"segment grids differ: ({a.h}, {a.m}) vs ({b.h}, {b.m})")


def trapezoid_quad(values: np.ndarray, dx: float) -> float:
    """Composite trapezoid sum; the one quadrature used across the package."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise GridMismatch("quadrature needs at least two nodes")
    return float(dx * (0.5 * values[0] + np.sum(values[1:-1]) + 0.5 * values[-1]))


def h_norm(seg: FunctionalSegment, atom_only: bool = False) -> float:
    """sqrt(Q(f^2) + f(h)^2) with Q the trapezoid rule on the segment grid.

    ``atom_only=True`` treats the interior integral as exactly zero; it is
    only valid for functions supported on the endpoint atom (all interior
    nodes zero) and exists so the atom indicator has unit norm exactly
    rather than up to one trapezoid cell.
    """
    if atom_only:
        if np.any(seg.values[:-1] != 0.0):
            raise ValueError("atom_only applies to functions supported on the atom")
        return abs(seg.end_value)
    interior = trapezoid_quad(seg.values**2, seg.grid.dt)
    return math.sqrt(interior + seg.end_value**2)


def b_norm(seg: FunctionalSegment) -> float:
    """Supremum norm over the nodes."""
    return float(np.max(np.abs(seg.values)))


def atom_indicator(grid: SegmentGrid) -> FunctionalSegment:
    """Indicator of a Lebesgue-null set containing h: zero except at the last node.

    It has unit norm under the endpoint-atom measure and attains the
    operator norm of the autocorrelation operator.
    """
    values = np.zeros(grid.m + 1)
    values[-1] = 1.0
    return FunctionalSegment(grid=grid, values=values)


@dataclass(frozen=True)
class RhoOperator:
    """Autocorrelation operator x -> exp(-theta t) x(h) on a segment grid."""

    theta: float
    grid: SegmentGrid

    def __post_init__(self):
        if not (self.theta > 0.0) or not math.isfinite(self.theta):
            raise DomainError(f"operator rate must be positive, got {self.theta}")


def apply_rho(op: RhoOperator, x: FunctionalSegment) -> FunctionalSegment:
    """(rho x)(t) = exp(-theta t) x(h) at every node."""
    _check_same_grid(op.grid, x.grid)
    values = np.exp(-op.theta * op.grid.times()) * x.end_value
    return FunctionalSegment(grid=x.grid, values=values)


def apply_rho_power(op: RhoOperator, k: int, x: FunctionalSegment) -> FunctionalSegment:
    """k-fold composition: (rho^k x)(t) = exp(-theta t) exp(-theta (k-1) h) x(h)."""
    if k < 1:
        raise DomainError(f"power must be >= 1, got {k}")
    _check_same_grid(op.grid, x.grid)
    factor = math.exp(-op.theta * (k - 1) * op.grid.h) * x.end_value
    values = np.exp(-op.theta * op.grid.times()) * factor
    return FunctionalSegment(grid=x.grid, values=values)


def rho_norm_h(theta: float, k: int, h: float) -> float:
    """Exact operator norm of rho^k on L2([0,h], dt + endpoint atom):

        exp(-theta (k-1) h) * sqrt((1 + exp(-2 theta h) (2 theta - 1)) / (2 theta))

    It is < 1 for k = 1 iff theta > 1/2, and < 1 for every theta once
    k >= k0(theta).
    """
    if not (theta > 0.0 and h > 0.0):
        raise DomainError("theta and h must be positive")
    if k < 1:
        raise DomainError(f"power must be >= 1, got {k}")
    base = math.sqrt((1.0 + math.exp(-2.0 * theta * h) * (2.0 * theta - 1.0)) / (2.0 * theta))
    return math.exp(-theta * (k - 1) * h) * base


def rho_norm_h_discrete(theta: float, k: int, grid: SegmentGrid) -> float:
    """Discrete-grid oracle for ``rho_norm_h``.

    rho^k(x) depends on x only through x(h), so the discrete operator norm is
    attained by the atom indicator (unit norm in atom-only mode) and equals

        sqrt(Q(exp(-2 theta t)) + exp(-2 theta h)) * exp(-theta (k-1) h)

    with Q the trapezoid rule on the grid.  Agreement with the closed form is
    O((h/m)^2), the quadrature error.
    """
    if not theta > 0.0:
        raise DomainError("theta must be positive")
    if k < 1:
        raise DomainError(f"power must be >= 1, got {k}")
    t = grid.times()
    q = trapezoid_quad(np.exp(-2.0 * theta * t), grid.dt)
    return math.sqrt(q + math.exp(-2.0 * theta * grid.h)) * math.exp(-theta * (k - 1) * grid.h)


def rho_norm_b(theta: float, k: int, h: float) -> float:
    """Operator norm of rho^k on C([0,h]) with the sup norm: exp(-theta (k-1) h).

    The constant function 1 attains it (the sup of exp(-theta t) sits at
    t = 0), so the value is <= 1 always and equals 1 exactly for k = 1.
    The exact value for k >= 2 follows from the same witness; only the
    upper bound <= 1 is classical.
    """
    if not (theta > 0.0 and h > 0.0):
        raise DomainError("theta and h must be positive")
    if k < 1:
        raise DomainError(f"power must be >= 1, got {k}")
    return math.exp(-theta * (k - 1) * h)


def k0(theta: float) -> int:
    """Smallest power ceil(1/theta + 1) making rho^k a strict contraction in h_norm."""
    if not theta > 0.0:
        raise DomainError("theta must be positive")
    return math.ceil(1.0 / theta + 1.0)


def _exp_moment(k: int, c: float, h: float) -> float:
    """int_0^h t^k exp(-c t) dt = k! P(k+1, c h) / c^(k+1), stable for any c h."""
    return math.factorial(k) * float(gammainc(k + 1, c * h)) / c ** (k + 1)


def operator_distance_h(theta: float, theta_hat: float, h: float) -> float:
    """Exact operator-norm distance between rho_theta and rho_theta_hat on H:

        sqrt(I + (exp(-theta h) - exp(-theta_hat h))^2),
        I = int_0^h (exp(-theta t) - exp(-theta_hat t))^2 dt,

    with I in closed form:
        (1-e^{-2 theta h})/(2 theta) - 2 (1-e^{-(theta+theta_hat) h})/(theta+theta_hat)
        + (1-e^{-2 theta_hat h})/(2 theta_hat).

    For |theta - theta_hat| h below 1e-3 the three-term form is catastrophic
    cancellation in doubles, so the same integral is evaluated through its
    Taylor form in the rate gap (relative truncation error below 1e-9); the
    linear bound then dominates the result for every representable input,
    matching the underlying inequality.
    """
    if not (theta > 0.0 and theta_hat > 0.0 and h > 0.0):
        raise DomainError("rates and h must be positive")
    a, b = theta, theta_hat
    delta = b - a
    # endpoint term e^{-a h} (1 - e^{-delta h}), exact to rounding at any gap
    endpoint = (math.exp(-a * h) * -math.expm1(-delta * h)) ** 2
    if abs(delta) * h <= 1e-3:
        # (1 - e^{-x})^2 = x^2 - x^3 + 7 x^4 / 12 - ... with x = delta t
        integral = (
            delta**2 * _exp_moment(2, 2.0 * a, h)
            - delta**3 * _exp_moment(3, 2.0 * a, h)
            + (7.0 / 12.0) * delta**4 * _exp_moment(4, 2.0 * a, h)
        )
    else:
        integral = (
            -math.expm1(-2.0 * a * h) / (2.0 * a)
            + 2.0 * math.expm1(-(a + b) * h) / (a + b)
            - math.expm1(-2.0 * b * h) / (2.0 * b)
        )
    # roundoff can push the cancelling integral a hair below zero at a ~ b
    return math.sqrt(max(integral, 0.0) + endpoint)


def operator_distance_h_bound(theta: float, theta_hat: float, h: float) -> float:
    """Upper bound |theta - theta_hat| * h * sqrt(h/3 + 1) for the H distance."""
    if not h > 0.0:
        raise DomainError("h must be positive")
    return abs(theta - theta_hat) * h * math.sqrt(h / 3.0 + 1.0)


def operator_distance_b(theta: float, theta_hat: float, h: float) -> float:
    """sup_{0<=t<=h} |exp(-theta t) - exp(-theta_hat t)|, computed analytically.

    For theta != theta_hat the only interior critical point of the difference
    is t* = ln(theta_hat/theta)/(theta_hat - theta); the sup is the larger of
    the values at t* (clipped to [0, h]) and at h (the value at 0 is 0).
    The difference is evaluated as exp(-theta t) (1 - e^{-(theta_hat-theta) t})
    so nearly-equal rates do not cancel.
    """
    if not (theta > 0.0 and theta_hat > 0.0 and h > 0.0):
        raise DomainError("rates and h must be positive")
    if theta == theta_hat:
        return 0.0
    delta = theta_hat - theta

    def gap(t: float) -> float:
        return abs(math.exp(-theta * t) * math.expm1(-delta * t))

    candidates = [gap(h)]
    t_star = math.log(theta_hat / theta) / delta
    if 0.0 < t_star < h:
        candidates.append(gap(t_star))
    return max(candidates)


def operator_distance_b_grid(
    theta: float, theta_hat: float, h: float, nodes: int = 10**6
) -> float:
    """Brute-force oracle for ``operator_distance_b``: dense grid search."""
    t = np.linspace(0.0, h, nodes)
    return float(np.max(np.abs(np.exp(-theta * t) - np.exp(-theta_hat * t))))


def innovation(x_n: FunctionalSegment, x_prev: FunctionalSegment, theta: float) -> FunctionalSegment:
    """Autoregression residual eps_n = X_n - rho_theta(X_{n-1}).

    For consecutive blocks of one path, eps_n(0) = X_n(0) - X_{n-1}(h) = 0
    exactly because the boundary sample is shared.
    """
    _check_same_grid(x_n.grid, x_prev.grid)
    op = RhoOperator(theta=theta, grid=x_n.grid)
    values = x_n.values - apply_rho(op, x_prev).values
    return FunctionalSegment(grid=x_n.grid, values=values)


def segment_path(path: SamplePath, h: float) -> list[FunctionalSegment]:
    """Cut a path into blocks X_n(t) = xi_{nh+t}, n = 0 .. floor(T/h) - 1.

    ``h`` must be an integer multiple of the path step (1e-9 relative) and
    T >= h.  Consecutive blocks share the boundary sample, so
    X_n(0) == X_{n-1}(h) bit-exactly.
    """
    dt = path.grid.dt
    ratio = h / dt
    m = int(round(ratio))
    if m < 1 or abs(ratio - m) > 1e-9 * max(ratio, 1.0):
        raise GridMismatch(f"segment length {h} is not a multiple of path step {dt}")
    n_segments = path.grid.n_steps // m
    if n_segments < 1:
        raise GridMismatch(f"path of length {path.grid.t_end} too short for segments of {h}")
    grid = SegmentGrid(h=h, m=m)
    return [
        FunctionalSegment(grid=grid, values=path.values[n * m : (n + 1) * m + 1])
        for n in range(n_segments)
    ]
