"""Monte Carlo harness: band coverage, EMSE, predictor-bound exceedance.

Replicates are independent work items.  Each one derives its own 64-bit seed
from (master_seed, theta_index, horizon_index, replicate_index) through a
splitmix64-based injective mixer, simulates a path, and estimates theta with
the Ito-sum MLE.  Results are stored by replicate index and reduced in index
order, so reports are byte-identical for any worker count.

Estimation failures (identically-zero paths) are excluded from the cell
statistics but counted and reported; they are never resampled, which would
bias coverage.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Callable

import numpy as np
from scipy import stats

from .errors import DomainError, ZeroDenominator
from .mle import asymptotic_std, lil_envelope, theta_ito_from_values
from .ou_process import SCHEMES, OuParams, TimeGrid, sample_euler, sample_exact
from .predict import error_bound_b, error_bound_h

_MASK64 = (1 << 64) - 1
# field widths of the packed replicate address: 16 + 16 + 32 bits
_MAX_THETA_INDEX = 1 << 16
_MAX_T_INDEX = 1 << 16
_MAX_REPLICATE_INDEX = 1 << 32

RNG_ALGORITHM = "numpy default_rng (PCG64); normal variates via Generator.standard_normal"


def _splitmix64(x: int) -> int:
    """One splitmix64 step: add the golden gamma, then finalize (bijective)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_replicate_seed(
    master_seed: int, theta_index: int, t_index: int, replicate_index: int
) -> int:
    """Stateless 64-bit seed for one replicate.

    The three indices are packed into disjoint bit fields (16+16+32) and the
    packed word is passed through xor-with-mixed-master and a second
    splitmix64 finalizer.  Both steps are bijections on 64-bit words, so for
    a fixed master seed the map from (theta_index, t_index, replicate_index)
    to the seed is injective.  Identical across platforms: pure integer
    arithmetic mod 2^64.
    """
    if not 0 <= theta_index < _MAX_THETA_INDEX:
        raise DomainError(f"theta_index out of range [0, {_MAX_THETA_INDEX}): {theta_index}")
    if not 0 <= t_index < _MAX_T_INDEX:
        raise DomainError(f"t_index out of range [0, {_MAX_T_INDEX}): {t_index}")
    if not 0 <= replicate_index < _MAX_REPLICATE_INDEX:
        raise DomainError(
            f"replicate_index out of range [0, {_MAX_REPLICATE_INDEX}): {replicate_index}"
        )
    packed = (theta_index << 48) | (t_index << 32) | replicate_index
    return _splitmix64(_splitmix64(master_seed & _MASK64) ^ packed)


def _is_multiple(value: float, step: float) -> bool:
    ratio = value / step
    return abs(ratio - round(ratio)) <= 1e-9 * max(ratio, 1.0) and round(ratio) >= 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Grid and budget of one Monte Carlo experiment.

    Every horizon T must be an integer multiple of both dt and the segment
    length h (1e-9 relative), and h a multiple of dt, so segment boundaries
    fall on grid nodes.  ``scheme`` picks the path sampler; the exact scheme
    starts from the stationary law, the Euler scheme from xi_0 = 0.
    """

    thetas: tuple[float, ...]
    horizons: tuple[float, ...]
    dt: float = 0.02
    replicates: int = 200
    h: float = 1.0
    epsilon: float = 0.008
    band_k: float = 3.0
    scheme: str = "euler"
    master_seed: int = 20260810
    lil_multiplier: float = 1.5

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "horizons", tuple(float(t) for t in self.horizons))
        if not self.thetas or any(t <= 0.0 for t in self.thetas):
            raise DomainError(f"thetas must be positive: {self.thetas}")
        if not self.horizons or any(t <= 0.0 for t in self.horizons):
            raise DomainError(f"horizons must be positive: {self.horizons}")
        if self.dt <= 0.0 or self.h <= 0.0 or self.epsilon <= 0.0:
            raise DomainError("dt, h, and epsilon must be positive")
        if self.band_k < 0.0 or self.lil_multiplier <= 0.0:
            raise DomainError("band_k must be >= 0 and lil_multiplier > 0")
        if self.replicates < 1:
            raise DomainError(f"need at least one replicate, got {self.replicates}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed <= _MASK64:
            raise DomainError("master_seed must be an integer in [0, 2^64)")
        if not _is_multiple(self.h, self.dt):
            raise DomainError(f"h={self.h} must be an integer multiple of dt={self.dt}")
        for t_end in self.horizons:
            if not _is_multiple(t_end, self.dt):
                raise DomainError(f"T={t_end} is not a multiple of dt={self.dt}")
            if not _is_multiple(t_end, self.h):
                raise DomainError(f"T={t_end} is not a multiple of h={self.h}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class CellData:
    """Raw per-replicate results for one (theta, T) cell, index order preserved."""

    theta: float
    t_end: float
    theta_hats: np.ndarray  # NaN where estimation failed
    x_prev_h: np.ndarray  # path value at the last completed block boundary
    failures: int

    @property
    def completed(self) -> np.ndarray:
        return ~np.isnan(self.theta_hats)

    @property
    def ok_theta_hats(self) -> np.ndarray:
        return self.theta_hats[self.completed]


@dataclass
class ExperimentReport:
    """Aggregated cells plus full provenance; serialization lives in reporting."""

    kind: str
    config: ExperimentConfig
    cells: list[dict]
    failures_total: int
    wall_time_s: float = 0.0  # volatile, kept out of the deterministic report bytes
    n_workers: int = 1  # volatile


def _replicate(config: ExperimentConfig, theta: float, t_end: float, seed: int):
    """Simulate one path, estimate theta, grab the last block-boundary value."""
    rng = np.random.default_rng(seed)
    params = OuParams(theta=theta)
    grid = TimeGrid(t_end=t_end, dt=config.dt)
    if config.scheme == "euler":
        path = sample_euler(params, grid, rng, x0=0.0)
    else:
        path = sample_exact(params, grid, rng, stationary=True)
    # value at time (T/h - 1) * h, the boundary where the last block starts
    steps_per_block = int(round(config.h / config.dt))
    n_blocks = int(round(t_end / config.h))
    boundary_index = (n_blocks - 1) * steps_per_block
    x_prev_h = float(path.values[boundary_index])
    try:
        theta_hat = theta_ito_from_values(path.values, config.dt).theta_hat
    except ZeroDenominator:
        theta_hat = math.nan
    return theta_hat, x_prev_h


def collect_cells(config: ExperimentConfig, n_workers: int = 1) -> list[CellData]:
    """Run all replicates of all cells; deterministic for any worker count."""
    cells = []
    for ti, theta in enumerate(config.thetas):
        for hi, t_end in enumerate(config.horizons):
            n = config.replicates
            seeds = [
                derive_replicate_seed(config.master_seed, ti, hi, r) for r in range(n)
            ]
            work = lambda r: _replicate(config, theta, t_end, seeds[r])  # noqa: E731
            if n_workers <= 1:
                results = [work(r) for r in range(n)]
            else:
                with ThreadPoolExecutor(max_workers=n_workers) as pool:
                    results = list(pool.map(work, range(n)))
            theta_hats = np.array([r[0] for r in results])
            x_prev = np.array([r[1] for r in results])
            cells.append(
                CellData(
                    theta=theta,
                    t_end=t_end,
                    theta_hats=theta_hats,
                    x_prev_h=x_prev,
                    failures=int(np.isnan(theta_hats).sum()),
                )
            )
    return cells


# aggregation seams, also used directly by tests with synthetic estimates


def coverage_cell(theta: float, t_end: float, theta_hats: np.ndarray, band_k: float) -> float:
    """Fraction of |theta_hat - theta| <= band_k sqrt(2 theta / T), boundary included."""
    half_width = band_k * asymptotic_std(theta, t_end)
    return float(np.mean(np.abs(theta_hats - theta) <= half_width))


def emse_cell(theta: float, theta_hats: np.ndarray) -> float:
    """(1/N) sum (theta - theta_hat)^2 over completed replicates."""
    return float(np.mean((theta - theta_hats) ** 2))


def predictor_cell(
    theta: float,
    theta_hats: np.ndarray,
    x_prev_h: np.ndarray,
    h: float,
    epsilon: float,
) -> tuple[float, float]:
    """(p_hat_H, p_hat_B): 1 - fraction of replicates whose bound exceeds epsilon."""
    bound_h = np.array(
        [error_bound_h(theta, th, x, h) for th, x in zip(theta_hats, x_prev_h)]
    )
    bound_b = np.array(
        [error_bound_b(theta, th, x, h) for th, x in zip(theta_hats, x_prev_h)]
    )
    p_h = 1.0 - float(np.mean(bound_h > epsilon))
    p_b = 1.0 - float(np.mean(bound_b > epsilon))
    return p_h, p_b


def z_scores(theta: float, t_end: float, theta_hats: np.ndarray) -> np.ndarray:
    """Standardized errors (theta_hat - theta) / sqrt(2 theta / T)."""
    return (theta_hats - theta) / asymptotic_std(theta, t_end)


def lil_cell(
    theta: float, t_end: float, theta_hats: np.ndarray, multiplier: float
) -> float:
    """Fraction of |theta_hat - theta| <= multiplier * sqrt(4 theta log log T / T)."""
    envelope = lil_envelope(theta, t_end)
    return float(np.mean(np.abs(theta_hats - theta) <= multiplier * envelope))


def _run(config: ExperimentConfig, kind: str, build_cell: Callable, n_workers: int) -> ExperimentReport:
    start = time.perf_counter()
    data = collect_cells(config, n_workers=n_workers)
    cells = [build_cell(cd) for cd in data]
    return ExperimentReport(
        kind=kind,
        config=config,
        cells=cells,
        failures_total=sum(cd.failures for cd in data),
        wall_time_s=time.perf_counter() - start,
        n_workers=n_workers,
    )


def run_band_coverage(config: ExperimentConfig, n_workers: int = 1) -> ExperimentReport:
    """Empirical probability of |theta_hat - theta| <= band_k sqrt(2 theta/T) per cell."""

    def cell(cd: CellData) -> dict:
        ok = cd.ok_theta_hats
        return {
            "theta": cd.theta,
            "T": cd.t_end,
            "N": config.replicates,
            "k": config.band_k,
            "coverage": coverage_cell(cd.theta, cd.t_end, ok, config.band_k) if ok.size else math.nan,
            "failures": cd.failures,
        }

    return _run(config, "band_coverage", cell, n_workers)


def run_emse(config: ExperimentConfig, n_workers: int = 1) -> ExperimentReport:
    """Empirical mean square error of theta_hat per cell, with the 2 theta/T reference."""

    def cell(cd: CellData) -> dict:
        ok = cd.ok_theta_hats
        return {
            "theta": cd.theta,
            "T": cd.t_end,
            "N": config.replicates,
            "emse": emse_cell(cd.theta, ok) if ok.size else math.nan,
            "two_theta_over_T": 2.0 * cd.theta / cd.t_end,
            "failures": cd.failures,
        }

    return _run(config, "emse", cell, n_workers)


def run_predictor_bound(config: ExperimentConfig, n_workers: int = 1) -> ExperimentReport:
    """Empirical probabilities that the prediction-error bounds stay below epsilon.

    The bound pairs |X(h)| |theta - theta_hat| h sqrt(h/3 + 1) (L2-with-atom)
    and |X(h)| |theta - theta_hat| h (sup norm); sqrt(h/3 + 1) > 1, so the
    sup-norm bound never exceeds the other and p_hat_B >= p_hat_H cell by cell.
    """

    def cell(cd: CellData) -> dict:
        ok = cd.completed
        if ok.any():
            p_h, p_b = predictor_cell(
                cd.theta, cd.theta_hats[ok], cd.x_prev_h[ok], config.h, config.epsilon
            )
        else:
            p_h = p_b = math.nan
        return {
            "theta": cd.theta,
            "T": cd.t_end,
            "N": config.replicates,
            "epsilon": config.epsilon,
            "p_hat_H": p_h,
            "p_hat_B": p_b,
            "failures": cd.failures,
        }

    return _run(config, "predictor_bound", cell, n_workers)


def standardized_errors(config: ExperimentConfig, n_workers: int = 1) -> ExperimentReport:
    """Per-replicate standardized errors plus mean/variance/KS summary per cell."""

    def cell(cd: CellData) -> dict:
        ok = cd.completed
        z = z_scores(cd.theta, cd.t_end, cd.theta_hats[ok]) if ok.any() else np.array([])
        ks = float(stats.kstest(z, "norm").statistic) if z.size else math.nan
        return {
            "theta": cd.theta,
            "T": cd.t_end,
            "N": config.replicates,
            "z_mean": float(np.mean(z)) if z.size else math.nan,
            "z_var": float(np.var(z, ddof=1)) if z.size > 1 else math.nan,
            "z_ks": ks,
            "failures": cd.failures,
            # original replicate indices; failed replicates simply have no row
            "z_replicates": [int(i) for i in np.nonzero(ok)[0]],
            "z": [float(v) for v in z],
        }

    return _run(config, "normality", cell, n_workers)


def lil_coverage(config: ExperimentConfig, n_workers: int = 1) -> ExperimentReport:
    """Diagnostic coverage of the iterated-logarithm envelope, scaled by lil_multiplier."""

    def cell(cd: CellData) -> dict:
        ok = cd.ok_theta_hats
        return {
            "theta": cd.theta,
            "T": cd.t_end,
            "N": config.replicates,
            "multiplier": config.lil_multiplier,
            "envelope": lil_envelope(cd.theta, cd.t_end),
            "lil_coverage": lil_cell(cd.theta, cd.t_end, ok, config.lil_multiplier)
            if ok.size
            else math.nan,
            "failures": cd.failures,
        }

    return _run(config, "lil_coverage", cell, n_workers)
