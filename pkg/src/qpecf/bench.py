"""Monte Carlo error campaigns over a (phase, qubits, shots) grid.

Each cell repeats the simulate-sample-fit pipeline and aggregates circular
estimation errors into an RMSE, compared against the square root of the
Cramer-Rao bound and against the traditional nearest-bin error. Per-trial
seeds are a pure function of (base_seed, theta, n, k, trial), so results
are bit-identical regardless of scheduling or worker count.
"""

from __future__ import annotations

import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ConfigError, DomainError, FitError
from .fitting import fit_single
from .formatting import sig12
from .model import PhaseModel, RegisterSpec, _check_int
from .pmf import _check_theta, analytic_distribution, circuit_depth_units, crlb_mse
from .simulate import histogram_to_probs, sample_shots

# A cell whose exclusion rate exceeds this fraction is flagged invalid.
MAX_EXCLUDED_FRACTION = 0.01

CSV_HEADER = (
    "theta_true,n,M,k,trials,excluded,rmse,mean_abs_error,"
    "crlb_rmse,ratio,traditional_error,depth_units"
)


@dataclass(frozen=True)
class BenchGrid:
    """Campaign definition: the cross product of phases, qubit counts, and shots."""

    phases: tuple[float, ...]
    n_values: tuple[int, ...]
    shot_values: tuple[int, ...]
    trials: int
    base_seed: int

    def __post_init__(self) -> None:
        phases = tuple(_check_theta(t) for t in self.phases)
        n_values = tuple(RegisterSpec(n).n for n in self.n_values)
        shot_values = tuple(_check_int(k, "shots") for k in self.shot_values)
        if not phases or not n_values or not shot_values:
            raise DomainError("phases, n_values, and shot_values must be non-empty")
        if any(k < 1 for k in shot_values):
            raise DomainError("every shot count must be >= 1")
        trials = _check_int(self.trials, "trials")
        if trials < 1:
            raise DomainError(f"trials must be >= 1, got {trials}")
        base_seed = _check_int(self.base_seed, "base_seed")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "n_values", n_values)
        object.__setattr__(self, "shot_values", shot_values)
        object.__setattr__(self, "trials", trials)
        object.__setattr__(self, "base_seed", base_seed)

    @classmethod
    def from_json_dict(cls, data: dict) -> "BenchGrid":
        if not isinstance(data, dict):
            raise ConfigError("grid config must be a JSON object")
        fields = {
            "phases": list,
            "n_values": list,
            "shot_values": list,
            "trials": int,
            "base_seed": int,
        }
        for name, kind in fields.items():
            if name not in data:
                raise ConfigError(f"config field '{name}' is missing")
            if not isinstance(data[name], kind) or isinstance(data[name], bool):
                raise ConfigError(f"config field '{name}' must be a {kind.__name__}")
        try:
            return cls(
                phases=tuple(float(t) for t in data["phases"]),
                n_values=tuple(data["n_values"]),
                shot_values=tuple(data["shot_values"]),
                trials=data["trials"],
                base_seed=data["base_seed"],
            )
        except (DomainError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid grid config: {exc}") from exc

    def to_json_dict(self) -> dict:
        return {
            "phases": list(self.phases),
            "n_values": list(self.n_values),
            "shot_values": list(self.shot_values),
            "trials": self.trials,
            "base_seed": self.base_seed,
        }


@dataclass(frozen=True)
class BenchRecord:
    """Aggregated estimation errors for one (theta, n, k) cell."""

    theta_true: float
    n: int
    M: int
    k: int
    trials: int
    excluded: int
    rmse: float
    mean_abs_error: float
    crlb_rmse: float
    ratio: float
    traditional_error: float
    depth_units: int
    valid: bool


def circular_error(theta_hat: float, theta_true: float) -> float:
    """Distance on the unit phase circle: min(|d|, 1 - |d|)."""
    d = abs(_check_theta(theta_hat) - _check_theta(theta_true))
    return min(d, 1.0 - d)


def trial_seed(base_seed: int, theta: float, n: int, k: int, trial: int) -> np.random.SeedSequence:
    """Seed for one trial, a pure function of the cell coordinates.

    theta enters through its float64 bit pattern, so any representable phase
    hashes uniquely.
    """
    theta_bits = int(np.float64(theta).view(np.uint64))
    return np.random.SeedSequence(
        entropy=(int(base_seed), theta_bits, int(n), int(k), int(trial))
    )


def cell_estimates(
    theta: float, reg: RegisterSpec, k: int, trials: int, base_seed: int
) -> tuple[np.ndarray, int]:
    """Per-trial phase estimates for one cell, with the count of failed fits."""
    dist = analytic_distribution(reg, PhaseModel.single(theta))
    estimates = []
    excluded = 0
    for trial in range(trials):
        hist = sample_shots(dist, k, trial_seed(base_seed, theta, reg.n, k, trial))
        try:
            estimates.append(fit_single(histogram_to_probs(hist)).phases[0])
        except FitError:
            excluded += 1
    return np.array(estimates), excluded


def run_cell(theta: float, reg: RegisterSpec, k: int, trials: int, base_seed: int) -> BenchRecord:
    """Run one grid cell and aggregate its errors."""
    estimates, excluded = cell_estimates(theta, reg, k, trials, base_seed)
    if estimates.size:
        errors = np.array([circular_error(est, theta) for est in estimates])
        rmse = float(np.sqrt(np.mean(errors**2)))
        mean_abs = float(np.mean(errors))
    else:
        rmse = float("nan")
        mean_abs = float("nan")
    crlb_rmse = float(np.sqrt(crlb_mse(reg, k)))
    # Circular distance from theta to its nearest representable bin value.
    traditional_error = abs(theta * reg.M - round(theta * reg.M)) / reg.M
    return BenchRecord(
        theta_true=theta,
        n=reg.n,
        M=reg.M,
        k=k,
        trials=trials,
        excluded=excluded,
        rmse=rmse,
        mean_abs_error=mean_abs,
        crlb_rmse=crlb_rmse,
        ratio=rmse / crlb_rmse,
        traditional_error=traditional_error,
        depth_units=circuit_depth_units(reg),
        valid=excluded <= MAX_EXCLUDED_FRACTION * trials,
    )


def _run_cell_args(args: tuple) -> BenchRecord:
    theta, n, k, trials, base_seed = args
    return run_cell(theta, RegisterSpec(n), k, trials, base_seed)


def run_grid(grid: BenchGrid, workers: int = 1) -> list[BenchRecord]:
    """Run every cell of the grid, in deterministic grid order.

    Cells are independent; with workers > 1 they are fanned out to spawned
    processes. Records are identical for any worker count because seeds
    derive from cell coordinates alone.
    """
    cells = [
        (theta, n, k, grid.trials, grid.base_seed)
        for theta, n, k in product(grid.phases, grid.n_values, grid.shot_values)
    ]
    if workers <= 1:
        return [_run_cell_args(cell) for cell in cells]
    context = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=context) as pool:
        return list(pool.map(_run_cell_args, cells, chunksize=1))


@dataclass(frozen=True)
class ScalingSummary:
    """Fitted error-scaling exponents and the record count behind them."""

    slope_vs_k: float
    slope_vs_M: float
    cells_used: int

    def to_json_dict(self) -> dict:
        return {
            "slope_vs_k": self.slope_vs_k,
            "slope_vs_M": self.slope_vs_M,
            "cells_used": self.cells_used,
        }


def _group_slopes(records, key_fn, x_fn) -> tuple[list[float], set[int]]:
    groups: dict = {}
    for idx, rec in enumerate(records):
        # rmse = 0 cells (exactly representable phases) carry no log-scale information.
        if not np.isfinite(rec.rmse) or rec.rmse <= 0:
            continue
        groups.setdefault(key_fn(rec), []).append((idx, x_fn(rec), rec.rmse))
    slopes = []
    used: set[int] = set()
    for key in sorted(groups):
        entries = groups[key]
        xs = sorted({x for _, x, _ in entries})
        if len(xs) < 3:
            continue
        log_x = np.log10([x for _, x, _ in entries])
        log_r = np.log10([r for _, _, r in entries])
        slopes.append(float(np.polyfit(log_x, log_r, 1)[0]))
        used.update(idx for idx, _, _ in entries)
    return slopes, used


def fit_scaling_exponents(records: list[BenchRecord]) -> ScalingSummary:
    """Ordinary least squares of log10(rmse) against log10(k) and log10(M).

    The k slope is fitted within each (theta, n) group spanning at least 3
    distinct shot counts, the M slope within each (theta, k) group spanning
    at least 3 distinct register sizes; group slopes are averaged.
    cells_used counts the records that entered at least one regression.
    """
    k_slopes, k_used = _group_slopes(
        records, key_fn=lambda r: (r.theta_true, r.n), x_fn=lambda r: r.k
    )
    m_slopes, m_used = _group_slopes(
        records, key_fn=lambda r: (r.theta_true, r.k), x_fn=lambda r: r.M
    )
    if not k_slopes:
        raise DomainError("no (theta, n) group spans 3 distinct shot counts with rmse > 0")
    if not m_slopes:
        raise DomainError("no (theta, k) group spans 3 distinct register sizes with rmse > 0")
    return ScalingSummary(
        slope_vs_k=float(np.mean(k_slopes)),
        slope_vs_M=float(np.mean(m_slopes)),
        cells_used=len(k_used | m_used),
    )


def records_to_csv(records: list[BenchRecord]) -> str:
    """Render records as CSV, one row per cell, floats at 12 significant digits."""
    lines = [CSV_HEADER]
    for r in records:
        lines.append(
            ",".join(
                [
                    sig12(r.theta_true),
                    str(r.n),
                    str(r.M),
                    str(r.k),
                    str(r.trials),
                    str(r.excluded),
                    sig12(r.rmse),
                    sig12(r.mean_abs_error),
                    sig12(r.crlb_rmse),
                    sig12(r.ratio),
                    sig12(r.traditional_error),
                    str(r.depth_units),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def scaling_to_json(summary: ScalingSummary) -> str:
    return json.dumps(summary.to_json_dict()) + "\n"
