"""Statevector simulation of the phase estimation circuit, plus shot sampling.

The circuit is simulated at the level of its exact state: Hadamards put the
recording register in a uniform superposition, the controlled-unitary powers
kick the eigenphases back onto it, and the inverse Fourier transform is
applied as a dense unitary matrix. Probabilities, not gate counts, are the
product here, so no gate decomposition is performed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .model import OutcomeDistribution, PhaseModel, RegisterSpec, _check_int
from .pmf import _check_shots

AMP_NORM_TOL = 1e-12
STATE_NORM_TOL = 1e-10
# The dense inverse transform costs O(M^2) memory; past this it is unusable.
MAX_SIM_QUBITS = 12

# theta is split at 26 bits so theta_hi * x is exact for x < 2**27 and the
# fractional part of theta * x carries no product roundoff.
_SPLIT = float(1 << 26)


def _phase_frac(theta: float, x: np.ndarray) -> np.ndarray:
    """Fractional part of theta * x without the O(x * eps) product error."""
    hi = math.floor(theta * _SPLIT) / _SPLIT
    lo = theta - hi
    return (np.mod(hi * x, 1.0) + lo * x) % 1.0


@dataclass(frozen=True)
class SimUnitary:
    """Diagonal unitary with eigenphases attached to system basis states."""

    eigenphases: tuple[float, ...]
    amplitudes: tuple[complex, ...]

    def __post_init__(self) -> None:
        phases = tuple(float(t) for t in self.eigenphases)
        amps = tuple(complex(a) for a in self.amplitudes)
        if not phases:
            raise DomainError("at least one eigenphase is required")
        if len(phases) != len(amps):
            raise DomainError(
                f"{len(phases)} eigenphases but {len(amps)} amplitudes"
            )
        for t in phases:
            if not np.isfinite(t) or not 0.0 <= t < 1.0:
                raise DomainError(f"eigenphase must lie in [0, 1), got {t!r}")
        norm = sum(abs(a) ** 2 for a in amps)
        if abs(norm - 1.0) > AMP_NORM_TOL:
            raise DomainError(f"amplitude norm must be 1 within {AMP_NORM_TOL}, got {norm!r}")
        object.__setattr__(self, "eigenphases", phases)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_model(cls, model: PhaseModel) -> "SimUnitary":
        return cls(model.thetas, tuple(math.sqrt(w) for w in model.weights))

    @property
    def system_states(self) -> int:
        """Dimension of the minimal system register, 2**ceil(log2 J)."""
        return 1 << (len(self.eigenphases) - 1).bit_length()


@dataclass(frozen=True, eq=False)
class StateVector:
    """Joint state over (recording, system), amplitudes indexed [x, j]."""

    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 2:
            raise DomainError(f"amplitudes must be 2-d, got shape {amps.shape}")
        if abs(self.norm - 1.0) > STATE_NORM_TOL:
            raise DomainError(f"state norm must be 1 within {STATE_NORM_TOL}, got {self.norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(np.asarray(self.amplitudes)) ** 2)))


@dataclass(frozen=True, eq=False)
class ShotHistogram:
    """Observed counts per outcome state from k circuit executions."""

    reg: RegisterSpec
    counts: np.ndarray = field(repr=False)
    shots: int = 0

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        counts.setflags(write=False)
        shots = _check_int(self.shots, "shots")
        if counts.shape != (self.reg.M,):
            raise DomainError(f"counts must have shape ({self.reg.M},), got {counts.shape}")
        if counts.min(initial=0) < 0:
            raise DomainError("counts must be non-negative")
        if shots < 1:
            raise DomainError(f"shots must be >= 1, got {shots}")
        if int(counts.sum()) != shots:
            raise DomainError(f"counts sum to {int(counts.sum())}, expected shots = {shots}")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "shots", shots)

    def to_json_dict(self) -> dict:
        return {"n": self.reg.n, "shots": self.shots, "counts": [int(c) for c in self.counts]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "ShotHistogram":
        if not isinstance(data, dict):
            raise ConfigError("histogram JSON must be an object")
        for key in ("n", "shots", "counts"):
            if key not in data:
                raise ConfigError(f"histogram JSON is missing the '{key}' field")
        try:
            reg = RegisterSpec(data["n"])
            counts = data["counts"]
            if not isinstance(counts, list):
                raise DomainError("'counts' must be a list")
            return cls(reg, np.array([_check_int(c, "count") for c in counts]), data["shots"])
        except DomainError as exc:
            raise ConfigError(f"invalid histogram JSON: {exc}") from exc


def kickback_state(reg: RegisterSpec, unitary: SimUnitary) -> StateVector:
    """State after the Hadamards and controlled-unitary powers.

    Recording amplitude at x on system branch j carries a_j e^{2 pi i theta_j x}.
    """
    if reg.n > MAX_SIM_QUBITS:
        raise DomainError(f"dense simulation supports n <= {MAX_SIM_QUBITS}, got {reg.n}")
    M = reg.M
    x = np.arange(M, dtype=float)
    amps = np.zeros((M, unitary.system_states), dtype=complex)
    for j, (theta, a) in enumerate(zip(unitary.eigenphases, unitary.amplitudes)):
        amps[:, j] = a * np.exp(2j * np.pi * _phase_frac(theta, x)) / math.sqrt(M)
    return StateVector(amps)


def apply_inverse_fourier(reg: RegisterSpec, state: StateVector) -> StateVector:
    """Apply the exact inverse discrete Fourier transform to the recording register.

    Matrix entries e^{-2 pi i y x / M} / sqrt(M) are built from the integer
    residue (y * x) mod M, so each entry is accurate to one rounding.
    """
    M = reg.M
    if state.amplitudes.shape[0] != M:
        raise DomainError(
            f"state has {state.amplitudes.shape[0]} recording amplitudes, register has {M}"
        )
    idx = np.arange(M, dtype=np.int64)
    residues = np.outer(idx, idx) % M
    F = np.exp(-2j * np.pi * residues / M) / math.sqrt(M)
    return StateVector(F @ state.amplitudes)


def simulate_distribution(reg: RegisterSpec, unitary: SimUnitary) -> OutcomeDistribution:
    """Exact outcome distribution of the circuit: marginal over the system register."""
    final = apply_inverse_fourier(reg, kickback_state(reg, unitary))
    probs = np.sum(np.abs(final.amplitudes) ** 2, axis=1)
    return OutcomeDistribution(reg, probs)


def sample_shots(dist: OutcomeDistribution, k: int, seed) -> ShotHistogram:
    """Draw k independent outcomes from dist; deterministic for a fixed seed.

    seed may be an int, a numpy SeedSequence, or a ready Generator. The
    counter-based Philox generator keeps streams reproducible regardless of
    how calls are scheduled across processes.
    """
    k = _check_shots(k)
    if isinstance(seed, np.random.Generator):
        rng = seed
    else:
        rng = np.random.Generator(np.random.Philox(seed))
    cdf = np.cumsum(dist.probs)
    cdf[-1] = 1.0
    counts = np.zeros(dist.reg.M, dtype=np.int64)
    remaining = k
    while remaining > 0:
        batch = min(remaining, 1 << 22)
        u = rng.random(batch)
        counts += np.bincount(
            np.searchsorted(cdf, u, side="right"), minlength=dist.reg.M
        )
        remaining -= batch
    return ShotHistogram(dist.reg, counts, k)


def histogram_to_probs(hist: ShotHistogram) -> OutcomeDistribution:
    """Empirical distribution counts[y] / shots."""
    return OutcomeDistribution(hist.reg, hist.counts / hist.shots)
