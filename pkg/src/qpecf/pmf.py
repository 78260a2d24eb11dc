"""Closed-form outcome mathematics: probabilities, score, Fisher information, bounds.

Everything is expressed through the offset delta = y - theta*M. The raw
ratio form (1 - cos(2 pi delta)) / (1 - cos(2 pi delta / M)) loses precision
near its removable singularities, so evaluation uses the equivalent
sin^2(pi delta) / (M^2 sin^2(pi delta / M)) with two stabilizations:

* delta is reduced mod M to the representative in (-M/2, M/2], and the
  numerator's argument is further reduced to e = delta - round(delta) using
  sin(pi(m + e)) = (-1)^m sin(pi e), which keeps both sines evaluated at
  small arguments where they are fully accurate;
* |delta| < 1e-6 switches to a sinc-ratio series that is exact to well below
  float64 resolution there and returns exactly 1 at delta = 0.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .model import OutcomeDistribution, PhaseModel, RegisterSpec, _check_int

SMALL_DELTA = 1e-6
# Chunk length for whole-register reductions; keeps memory flat for large n.
_CHUNK = 1 << 20


def _reduce(delta: np.ndarray, M: int) -> np.ndarray:
    """Reduce offsets mod M to the representative in (-M/2, M/2]."""
    d = np.mod(delta, M)
    return np.where(d > M / 2, d - M, d)


def _pmf_kernel(delta, M: int) -> np.ndarray:
    """P as a function of delta = y - theta*M, vectorized."""
    d = np.atleast_1d(_reduce(np.asarray(delta, dtype=float), M))
    out = np.empty_like(d)
    small = np.abs(d) < SMALL_DELTA
    if np.any(small):
        a = (np.pi * d[small]) ** 2
        b = a / M**2
        num = 1.0 - a / 6.0 + a * a / 120.0
        den = 1.0 - b / 6.0 + b * b / 120.0
        out[small] = (num / den) ** 2
    big = ~small
    if np.any(big):
        db = d[big]
        e = db - np.round(db)
        num = np.sin(np.pi * e)
        den = M * np.sin(np.pi * db / M)
        out[big] = (num / den) ** 2
    return out


def _score_kernel(delta, M: int) -> np.ndarray:
    """d log P / d theta as a function of delta, vectorized.

    Diverges (+-inf) only where delta is exactly a nonzero integer, i.e.
    where P is exactly zero; every consumer weights the score by P.
    """
    d = np.atleast_1d(_reduce(np.asarray(delta, dtype=float), M))
    out = np.empty_like(d)
    small = np.abs(d) < SMALL_DELTA
    if np.any(small):
        ds = d[small]
        out[small] = 2.0 * np.pi * (
            np.pi * ds * (M - 1.0 / M) / 3.0
            + (np.pi * ds) ** 3 * (M - 1.0 / M**3) / 45.0
        )
    big = ~small
    if np.any(big):
        db = d[big]
        e = db - np.round(db)
        with np.errstate(divide="ignore"):
            cot_e = np.cos(np.pi * e) / np.sin(np.pi * e)
        cot_dM = np.cos(np.pi * db / M) / np.sin(np.pi * db / M)
        out[big] = 2.0 * np.pi * (cot_dM - M * cot_e)
    return out


def _pmf_grad_kernel(delta, M: int) -> np.ndarray:
    """d P / d theta (the product P * score evaluated jointly), vectorized.

    Finite everywhere: the sin(pi e) prefactor cancels the score's
    divergence at integer delta, giving exactly 0 there.
    """
    d = np.atleast_1d(_reduce(np.asarray(delta, dtype=float), M))
    out = np.empty_like(d)
    small = np.abs(d) < SMALL_DELTA
    if np.any(small):
        out[small] = _pmf_kernel(d[small], M) * _score_kernel(d[small], M)
    big = ~small
    if np.any(big):
        db = d[big]
        e = db - np.round(db)
        se = np.sin(np.pi * e)
        ce = np.cos(np.pi * e)
        sd = np.sin(np.pi * db / M)
        cd = np.cos(np.pi * db / M)
        out[big] = 2.0 * np.pi * se * (se * cd / sd - M * ce) / (M**2 * sd**2)
    return out


def _check_theta(theta) -> float:
    theta = float(theta)
    if not np.isfinite(theta) or not 0.0 <= theta < 1.0:
        raise DomainError(f"theta must lie in [0, 1), got {theta!r}")
    return theta


def _check_y(y, M: int) -> int:
    y = _check_int(y, "y")
    if not 0 <= y < M:
        raise DomainError(f"y must lie in [0, {M}), got {y}")
    return y


def _check_shots(k) -> int:
    k = _check_int(k, "k")
    if k < 1:
        raise DomainError(f"shot count must be >= 1, got {k}")
    return k


def pmf_single(reg: RegisterSpec, theta: float, y: int) -> float:
    """Probability of outcome y for a single eigenphase theta."""
    theta = _check_theta(theta)
    y = _check_y(y, reg.M)
    return float(_pmf_kernel(y - theta * reg.M, reg.M)[0])


def pmf_multi(reg: RegisterSpec, model: PhaseModel, y: int) -> float:
    """Probability of outcome y under a mixture of eigenphases."""
    y = _check_y(y, reg.M)
    return float(
        sum(c.weight * _pmf_kernel(y - c.theta * reg.M, reg.M)[0] for c in model.components)
    )


def pmf_vector(reg: RegisterSpec, model: PhaseModel) -> np.ndarray:
    """Probabilities of all M outcomes under a mixture model."""
    y = np.arange(reg.M, dtype=float)
    probs = np.zeros(reg.M)
    for c in model.components:
        probs += c.weight * _pmf_kernel(y - c.theta * reg.M, reg.M)
    return probs


def analytic_distribution(reg: RegisterSpec, model: PhaseModel) -> OutcomeDistribution:
    return OutcomeDistribution(reg, pmf_vector(reg, model))


def score(reg: RegisterSpec, theta: float, y: int) -> float:
    """Sensitivity d log P(y) / d theta at a single eigenphase."""
    theta = _check_theta(theta)
    y = _check_y(y, reg.M)
    return float(_score_kernel(y - theta * reg.M, reg.M)[0])


def fisher_information(reg: RegisterSpec) -> float:
    """Single-shot Fisher information, sum_y score(y)^2 P(y).

    Evaluated at the reference phase 1/(3M), where y - theta*M is never an
    integer; in this leakage regime the sum is independent of theta and
    depends only on M.
    """
    M = reg.M
    theta = 1.0 / (3.0 * M)
    total = 0.0
    for start in range(0, M, _CHUNK):
        y = np.arange(start, min(start + _CHUNK, M), dtype=float)
        d = y - theta * M
        total += float(np.sum(_score_kernel(d, M) ** 2 * _pmf_kernel(d, M)))
    return total


def total_fisher(reg: RegisterSpec, k: int) -> float:
    """Fisher information of k independent shots."""
    return _check_shots(k) * fisher_information(reg)


def crlb_mse(reg: RegisterSpec, k: int) -> float:
    """Lowest possible mean squared error of any unbiased estimate from k shots."""
    return 1.0 / total_fisher(reg, k)


def circuit_depth_units(reg: RegisterSpec) -> int:
    """Controlled-unitary applications in the circuit: 2**n - 1."""
    return (1 << reg.n) - 1
