"""Core domain types: register geometry, phase mixtures, outcome distributions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# M**2 terms must stay exact in float64, so n is capped well below 2**53.
MAX_RECORDING_QUBITS = 30

WEIGHT_SUM_TOL = 1e-12
PROB_SUM_TOL = 1e-10
# Slack for float roundoff on individual probabilities.
PROB_ENTRY_TOL = 1e-12


def _check_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class RegisterSpec:
    """Recording register with n qubits and M = 2**n outcome states."""

    n: int

    def __post_init__(self) -> None:
        n = _check_int(self.n, "n")
        if not 1 <= n <= MAX_RECORDING_QUBITS:
            raise DomainError(f"n must be in [1, {MAX_RECORDING_QUBITS}], got {n}")
        object.__setattr__(self, "n", n)

    @property
    def M(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class PhaseComponent:
    """One (phase, weight) term of a mixture; phase is in revolutions."""

    theta: float
    weight: float

    def __post_init__(self) -> None:
        theta = float(self.theta)
        weight = float(self.weight)
        if not np.isfinite(theta) or not 0.0 <= theta < 1.0:
            raise DomainError(f"theta must lie in [0, 1), got {self.theta!r}")
        if not np.isfinite(weight) or not 0.0 <= weight <= 1.0:
            raise DomainError(f"weight must lie in [0, 1], got {self.weight!r}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "weight", weight)


@dataclass(frozen=True)
class PhaseModel:
    """Mixture of phase components, sorted ascending by phase, weights summing to 1."""

    components: tuple[PhaseComponent, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        if not comps:
            raise DomainError("a phase model needs at least one component")
        comps = tuple(sorted(comps, key=lambda c: c.theta))
        thetas = [c.theta for c in comps]
        if len(set(thetas)) != len(thetas):
            raise DomainError(f"phases must be pairwise distinct, got {thetas}")
        total = sum(c.weight for c in comps)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights must sum to 1 within {WEIGHT_SUM_TOL}, got {total!r}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, theta: float) -> "PhaseModel":
        return cls((PhaseComponent(theta, 1.0),))

    @classmethod
    def from_pairs(cls, pairs) -> "PhaseModel":
        return cls(tuple(PhaseComponent(t, w) for t, w in pairs))

    @property
    def thetas(self) -> tuple[float, ...]:
        return tuple(c.theta for c in self.components)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(c.weight for c in self.components)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probability vector over the M outcome states of a register."""

    reg: RegisterSpec
    probs: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float).copy()
        probs.setflags(write=False)
        if probs.shape != (self.reg.M,):
            raise DomainError(f"probs must have shape ({self.reg.M},), got {probs.shape}")
        if not np.all(np.isfinite(probs)):
            raise DomainError("probs must be finite")
        if probs.min() < -PROB_ENTRY_TOL or probs.max() > 1.0 + PROB_ENTRY_TOL:
            raise DomainError("each probability must lie in [0, 1]")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"probabilities must sum to 1 within {PROB_SUM_TOL}, got {total!r}")
        object.__setattr__(self, "probs", probs)
