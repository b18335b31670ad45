"""Preparation unitary, reflections and the Grover operator ``Q = -A S0 A^dag S_chi``."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import ContractError, ValidationError
from .statevector import H, ry

ROTATION = "rotation"
COUNTING = "counting"


@dataclass(frozen=True)
class AmplitudeProblem:
    """What to estimate.

    ``variant == "rotation"``: one target qubit, ``A = Ry(theta)`` with good state ``|1>``.
    ``variant == "counting"``: ``A = H^{n_target}``, good states are ``marked``.

    ``phase`` optionally pins the exact eigenphase in [0, 0.5] the problem was built
    from; the analytic oracle uses it in place of ``arcsin(sqrt(p))/pi``.
    """

    variant: str = ROTATION
    p: float = 0.0
    n_target: int = 1
    marked: frozenset[int] = field(default_factory=frozenset)
    phase: float | None = None

    def __post_init__(self):
        if self.variant == ROTATION:
            if self.n_target != 1:
                raise ValidationError("rotation problems use exactly one target qubit")
            if not (0.0 <= self.p <= 1.0) or math.isnan(self.p):
                raise ValidationError(f"p must lie in [0, 1], got {self.p}")
        elif self.variant == COUNTING:
            if self.n_target < 1:
                raise ValidationError("n_target must be >= 1")
            n = 1 << self.n_target
            if any(not 0 <= x < n for x in self.marked):
                raise ValidationError(f"marked items must lie in [0, {n - 1}]")
            object.__setattr__(self, "p", len(self.marked) / n)
        else:
            raise ValidationError(f"unknown variant {self.variant!r}")
        if self.phase is not None and not 0.0 <= self.phase <= 0.5:
            raise ValidationError("phase must be folded into [0, 0.5]")

    @classmethod
    def rotation(cls, p: float) -> "AmplitudeProblem":
        return cls(ROTATION, float(p))

    @classmethod
    def from_amplitude(cls, a: float) -> "AmplitudeProblem":
        if not 0.0 <= a <= 1.0:
            raise ValidationError(f"amplitude must lie in [0, 1], got {a}")
        return cls(ROTATION, float(a) ** 2)

    @classmethod
    def from_phase(cls, phi: float | Fraction) -> "AmplitudeProblem":
        """Rotation problem with ``sqrt(p) = |sin(pi phi)|``; phi is taken mod 1."""
        phi = Fraction(phi) % 1
        folded = min(phi, 1 - phi)
        a = math.sin(math.pi * float(folded))
        return cls(ROTATION, min(1.0, a * a), phase=float(folded))

    @classmethod
    def counting(cls, n_target: int, marked) -> "AmplitudeProblem":
        return cls(COUNTING, 0.0, n_target, frozenset(int(x) for x in marked))

    @property
    def dim(self) -> int:
        return 1 << self.n_target

    @property
    def good_states(self) -> list[int]:
        return [1] if self.variant == ROTATION else sorted(self.marked)


def build_state_prep(problem: AmplitudeProblem) -> np.ndarray:
    if problem.variant == ROTATION:
        return ry(2 * math.asin(math.sqrt(problem.p)))
    return reduce(np.kron, [H] * problem.n_target)


def reflection_zero(dim: int) -> np.ndarray:
    s0 = np.eye(dim, dtype=np.complex128)
    s0[0, 0] = -1
    return s0


def reflection_good(problem: AmplitudeProblem) -> np.ndarray:
    diag = np.ones(problem.dim, dtype=np.complex128)
    diag[problem.good_states] = -1
    return np.diag(diag)


def eigenphases(problem: AmplitudeProblem) -> tuple[float, float]:
    """``(phi_plus, phi_minus)`` with ``phi_plus = arcsin(sqrt(p))/pi`` in [0, 0.5]."""
    if problem.phase is not None:
        phi_plus = problem.phase
    else:
        phi_plus = math.asin(math.sqrt(problem.p)) / math.pi
    return phi_plus, (1.0 - phi_plus) % 1.0


class GroverOperator:
    """``Q`` as a dense matrix with cached power-of-two powers.

    ``phase_shift`` multiplies ``Q`` by ``exp(2 pi i phase_shift)``, which shifts
    both eigenphases by the same amount.
    """

    def __init__(self, problem: AmplitudeProblem, phase_shift: float = 0.0):
        a = build_state_prep(problem)
        q = -a @ reflection_zero(problem.dim) @ a.conj().T @ reflection_good(problem)
        if phase_shift:
            q = np.exp(2j * np.pi * phase_shift) * q
        q.setflags(write=False)
        self.problem = problem
        self.phase_shift = float(phase_shift)
        self.matrix = q
        self.theta = 2 * math.asin(math.sqrt(problem.p))
        self.phi_plus, self.phi_minus = eigenphases(problem)
        self._powers = {1: q}
        self._lock = threading.Lock()

    @property
    def branch_phases(self) -> tuple[float, float]:
        """Eigenphases actually carried by this matrix, including any phase shift."""
        return (
            (self.phi_plus + self.phase_shift) % 1.0,
            (self.phi_minus + self.phase_shift) % 1.0,
        )

    def power(self, exponent: int) -> np.ndarray:
        if exponent < 1 or exponent & (exponent - 1):
            raise ContractError(f"exponent must be a power of two, got {exponent}")
        with self._lock:
            e = max(x for x in self._powers if x <= exponent)
            while e < exponent:
                sq = self._powers[e] @ self._powers[e]
                sq.setflags(write=False)
                e *= 2
                self._powers[e] = sq
            return self._powers[exponent]

    def prepopulate(self, max_exponent: int) -> None:
        e = 1
        while e <= max_exponent:
            self.power(e)
            e *= 2

    @property
    def cached_exponents(self) -> list[int]:
        return sorted(self._powers)


def build_grover(problem: AmplitudeProblem, phase_shift: float = 0.0) -> GroverOperator:
    return GroverOperator(problem, phase_shift)


def grover_power(q: GroverOperator, exponent: int) -> np.ndarray:
    return q.power(exponent)
