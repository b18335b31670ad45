"""Closed-form outcome laws for phase-estimation blocks.

These never touch a statevector, so they serve both as an independent check on
the simulator and as the fast backend for exact-mode runs.
"""
from __future__ import annotations

import numpy as np

from .errors import CapacityError, ContractError
from .grover import AmplitudeProblem, eigenphases

MAX_ANALYTIC_BITS = 20


def qpe_distribution(phi: float, m: int) -> np.ndarray:
    """Outcome law of an ``m``-qubit QPE register for an eigenstate with phase ``phi``.

    P(t) = sin^2(2^m pi d) / (2^{2m} sin^2(pi d)),  d = phi - t/2^m,
    with P(t) = 1 where d is an integer.
    """
    if not 1 <= m <= MAX_ANALYTIC_BITS:
        raise CapacityError(f"m must be in [1, {MAX_ANALYTIC_BITS}], got {m}")
    n = 1 << m
    t = np.arange(n)
    # reduce d to [-1/2, 1/2) before scaling so grid phases hit exactly 0
    d = (phi * n - t) / n
    d = d - np.round(d)
    den = np.sin(np.pi * d)
    on_grid = np.abs(den) < 1e-15
    safe = np.where(on_grid, 1.0, den)
    probs = np.where(on_grid, 1.0, np.sin(np.pi * n * d) ** 2 / (n * n * safe**2))
    return probs


def msb_split(phi: float, m_start: int) -> tuple[float, float]:
    """Probability that an ``m_start``-bit QPE readout of ``phi`` has MSB 0 / MSB 1."""
    r = qpe_distribution(phi, m_start)
    half = 1 << (m_start - 1)
    r0 = float(r[:half].sum())
    return r0, 1.0 - r0


def _mixture(phases, k: int, m: int, m_start: int) -> np.ndarray:
    joint = np.zeros((2, 1 << m))
    for phi in phases:
        r0, r1 = msb_split(phi, m_start)
        f = qpe_distribution((phi * (1 << k)) % 1.0, m)
        joint[0] += 0.5 * r0 * f
        joint[1] += 0.5 * r1 * f
    return joint


def block_joint_distribution(
    problem: AmplitudeProblem,
    k: int,
    m: int,
    m_start: int = 2,
    phase_shift: float = 0.0,
) -> np.ndarray:
    """Joint law of (ancilla bit, counting outcome) for one block, shape ``(2, 2**m)``.

    The prepared state is an equal-weight superposition of the two Grover
    eigenstates. On each branch the resolution and counting registers end up in
    a product state, so the branch laws factor and the branches add
    incoherently.
    """
    if k < 0:
        raise ContractError("offset k must be >= 0")
    if m < 1 or m_start < 1:
        raise ContractError("register widths must be >= 1")
    phi_plus, phi_minus = eigenphases(problem)
    phases = ((phi_plus + phase_shift) % 1.0, (phi_minus + phase_shift) % 1.0)
    return _mixture(phases, k, m, m_start)


def full_qae_distribution(problem: AmplitudeProblem, m: int, phase_shift: float = 0.0) -> np.ndarray:
    """Counting-register law of monolithic QAE: equal mixture of both branch laws."""
    phi_plus, phi_minus = eigenphases(problem)
    return 0.5 * qpe_distribution((phi_plus + phase_shift) % 1.0, m) + 0.5 * qpe_distribution(
        (phi_minus + phase_shift) % 1.0, m
    )


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())
