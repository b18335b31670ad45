"""Dense statevector simulation.

Bit order is fixed globally: qubit ``j`` carries weight ``2**j`` in the basis
index, and likewise position ``j`` of a register list carries weight ``2**j``
in that register's readout integer (the last-listed qubit is the MSB).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CapacityError, ValidationError

MAX_QUBITS = 24
UNITARY_TOL = 1e-12

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def phase_gate(angle: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * angle)]], dtype=np.complex128)


def ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


class StateVector:
    """Normalized amplitudes of a ``num_qubits`` register.

    Operations in this module return new instances; the amplitude array of an
    instance is never written after construction.
    """

    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, amps: np.ndarray):
        if amps.shape != (1 << num_qubits,):
            raise ValidationError(
                f"expected {1 << num_qubits} amplitudes, got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValidationError("amplitudes must be finite")
        self.num_qubits = num_qubits
        self.amps = amps

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit indices of the four logical registers of one estimation block."""

    resolution: tuple[int, ...]
    counting: tuple[int, ...]
    target: tuple[int, ...]
    ancilla: int

    def __post_init__(self):
        allq = [*self.resolution, *self.counting, *self.target, self.ancilla]
        if len(set(allq)) != len(allq):
            raise ValidationError("register indices must be distinct")
        if sorted(allq) != list(range(len(allq))):
            raise ValidationError("registers must cover qubits 0..n-1 exactly")

    @property
    def num_qubits(self) -> int:
        return len(self.resolution) + len(self.counting) + len(self.target) + 1

    @classmethod
    def contiguous(cls, m_start: int, m: int, n_target: int) -> "RegisterLayout":
        """Target lowest, then resolution, counting, and the ancilla on top."""
        target = tuple(range(n_target))
        res = tuple(range(n_target, n_target + m_start))
        cnt = tuple(range(n_target + m_start, n_target + m_start + m))
        return cls(res, cnt, target, n_target + m_start + m)


@dataclass
class Histogram:
    counts: dict[int, int] = field(default_factory=dict)
    total_kept: int = 0
    total_discarded: int = 0

    def __post_init__(self):
        if sum(self.counts.values()) != self.total_kept:
            raise ValidationError("histogram counts do not sum to total_kept")

    def to_dict(self) -> dict:
        return {
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "total_kept": self.total_kept,
            "total_discarded": self.total_discarded,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "Histogram":
        return cls(
            {int(k): int(v) for k, v in d["counts"].items()},
            int(d["total_kept"]),
            int(d["total_discarded"]),
        )


def new_state(num_qubits: int) -> StateVector:
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise CapacityError(f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}")
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def _check_indices(state: StateVector, qubits: Sequence[int]) -> None:
    if len(set(qubits)) != len(qubits):
        raise ValidationError(f"qubit indices must be distinct: {list(qubits)}")
    for q in qubits:
        if not 0 <= q < state.num_qubits:
            raise ValidationError(f"qubit {q} out of range for {state.num_qubits} qubits")


def _check_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> None:
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"gate must be square, got shape {u.shape}")
    # tolerance scales with dimension: repeated squaring accumulates rounding
    eye = np.eye(u.shape[0])
    if np.max(np.abs(u.conj().T @ u - eye)) > tol * max(1, u.shape[0]):
        raise ValidationError("gate is not unitary")


def _apply(
    state: StateVector,
    u: np.ndarray,
    targets: Sequence[int],
    controls: Sequence[int] = (),
) -> StateVector:
    n = state.num_qubits
    k = len(targets)
    # basis index bit q lives on tensor axis n-1-q (C order, MSB first)
    order = [n - 1 - c for c in controls] + [n - 1 - t for t in reversed(targets)]
    rest = [a for a in range(n) if a not in order]
    perm = order + rest
    psi = np.transpose(state.amps.reshape((2,) * n), perm)
    psi = psi.reshape(1 << len(controls), 1 << k, -1).copy()
    psi[-1] = u @ psi[-1]
    out = np.transpose(psi.reshape((2,) * n), np.argsort(perm)).reshape(-1)
    return StateVector(n, np.ascontiguousarray(out))


def apply_single(state: StateVector, gate: np.ndarray, qubit: int) -> StateVector:
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2):
        raise ValidationError(f"single-qubit gate must be 2x2, got {gate.shape}")
    _check_unitary(gate)
    _check_indices(state, [qubit])
    return _apply(state, gate, [qubit])


def apply_unitary(state: StateVector, u: np.ndarray, targets: Sequence[int]) -> StateVector:
    """Apply ``u`` unconditionally; ``targets[j]`` carries weight ``2**j`` in ``u``'s index."""
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (1 << len(targets),) * 2:
        raise ValidationError(f"unitary of shape {u.shape} does not match {len(targets)} targets")
    _check_unitary(u)
    _check_indices(state, targets)
    return _apply(state, u, targets)


def apply_controlled_unitary(
    state: StateVector,
    u: np.ndarray,
    control: int,
    targets: Sequence[int],
    *,
    check: bool = True,
) -> StateVector:
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (1 << len(targets),) * 2:
        raise ValidationError(f"unitary of shape {u.shape} does not match {len(targets)} targets")
    if control in targets:
        raise ValidationError(f"control {control} overlaps targets {list(targets)}")
    if check:
        _check_unitary(u)
    _check_indices(state, [control, *targets])
    return _apply(state, u, targets, [control])


def cnot(state: StateVector, control: int, target: int) -> StateVector:
    return apply_controlled_unitary(state, X, control, [target])


def swap(state: StateVector, a: int, b: int) -> StateVector:
    state = cnot(state, a, b)
    state = cnot(state, b, a)
    return cnot(state, a, b)


def apply_qft(state: StateVector, register: Sequence[int]) -> StateVector:
    """Gate-level QFT: |y> -> 2^{-m/2} sum_t exp(2 pi i y t / 2^m) |t>."""
    _check_indices(state, register)
    m = len(register)
    for i in reversed(range(m)):
        state = apply_single(state, H, register[i])
        for j in reversed(range(i)):
            state = apply_controlled_unitary(
                state, phase_gate(np.pi / 2 ** (i - j)), register[j], [register[i]]
            )
    for i in range(m // 2):
        state = swap(state, register[i], register[m - 1 - i])
    return state


def apply_iqft(state: StateVector, register: Sequence[int]) -> StateVector:
    """Exact inverse of :func:`apply_qft` (the QFT circuit run backwards, phases conjugated)."""
    _check_indices(state, register)
    m = len(register)
    for i in range(m // 2):
        state = swap(state, register[i], register[m - 1 - i])
    for i in range(m):
        for j in range(i):
            state = apply_controlled_unitary(
                state, phase_gate(-np.pi / 2 ** (i - j)), register[j], [register[i]]
            )
        state = apply_single(state, H, register[i])
    return state


def dft_matrix(m: int) -> np.ndarray:
    """Dense QFT matrix F[t, y] = 2^{-m/2} exp(2 pi i y t / 2^m)."""
    n = 1 << m
    y = np.arange(n)
    return np.exp(2j * np.pi * np.outer(y, y) / n) / np.sqrt(n)


def marginal_distribution(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    _check_indices(state, qubits)
    n = state.num_qubits
    keep = [n - 1 - q for q in reversed(qubits)]
    rest = [a for a in range(n) if a not in keep]
    p = np.transpose(state.probabilities().reshape((2,) * n), keep + rest)
    return p.reshape(1 << len(qubits), -1).sum(axis=1)


def sample(dist: np.ndarray, shots: int, rng_seed: int | np.random.Generator) -> Histogram:
    """Multinomial draw of ``shots`` outcomes from ``dist``."""
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 1 or np.any(dist < -1e-12) or abs(dist.sum() - 1) > 1e-9:
        raise ValidationError("dist must be a 1-d probability vector summing to 1")
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    pvals = np.clip(dist, 0, None)
    draws = rng.multinomial(shots, pvals / pvals.sum())
    counts = {int(t): int(c) for t, c in enumerate(draws) if c}
    return Histogram(counts, shots, 0)
