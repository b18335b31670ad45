"""Chunk stitching: special-chunk scan, LSB-to-MSB correction, phase to amplitude."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .engine import BitAllocation, BlockConfig, RawEstimate, run_awqae
from .errors import ContractError, ValidationError
from .grover import AmplitudeProblem, build_grover


@dataclass(frozen=True)
class ResolvedEstimate:
    phi_est_bits: str
    last_idx: int | None

    @property
    def n_total(self) -> int:
        return len(self.phi_est_bits)

    @property
    def index(self) -> int:
        return int(self.phi_est_bits, 2)

    @property
    def phi_est(self) -> Fraction:
        return Fraction(self.index, 1 << self.n_total)

    @property
    def special_flag(self) -> bool:
        return self.last_idx is not None

    @property
    def theta(self) -> float:
        return amplitude_from_phase(self.phi_est)[0]

    @property
    def p_tilde(self) -> float:
        return amplitude_from_phase(self.phi_est)[1]

    @property
    def a_tilde(self) -> float:
        return amplitude_from_phase(self.phi_est)[2]

    def to_dict(self) -> dict:
        return {
            "phi_est_bits": self.phi_est_bits,
            "phi_est": str(self.phi_est),
            "special_flag": self.special_flag,
            "last_idx": self.last_idx,
            "theta": self.theta,
            "p_tilde": self.p_tilde,
            "a_tilde": self.a_tilde,
        }


def partition(phi_raw: str, allocation: BitAllocation | Sequence[int]) -> list[str]:
    m_list = allocation.m_list if isinstance(allocation, BitAllocation) else tuple(allocation)
    if len(phi_raw) != sum(m_list):
        raise ValidationError(f"phi_raw has {len(phi_raw)} bits, allocation needs {sum(m_list)}")
    if set(phi_raw) - {"0", "1"}:
        raise ValidationError("phi_raw must be a binary string")
    chunks, pos = [], 0
    for m in m_list:
        chunks.append(phi_raw[pos:pos + m])
        pos += m
    return chunks


def find_special_chunk(chunks: Sequence[str]) -> int | None:
    """1-based index of the rightmost non-zero chunk if it reads ``10...0``, else None."""
    for j in range(len(chunks), 0, -1):
        x = int(chunks[j - 1], 2)
        if x == 0:
            continue
        return j if x == 1 << (len(chunks[j - 1]) - 1) else None
    return None


def resolve(
    phi_raw: str,
    allocation: BitAllocation | Sequence[int],
    amb_flags: Sequence[bool],
) -> ResolvedEstimate:
    """Stitch raw chunks into one phase estimate.

    Walks from the second-to-last chunk up to the first, subtracting the MSB of
    the (already corrected) next chunk unless the current chunk was ambiguous or
    the next chunk is the special one.
    """
    chunks = partition(phi_raw, allocation)
    b = len(chunks)
    if len(amb_flags) != b:
        raise ValidationError(f"{len(amb_flags)} flags for {b} chunks")
    last_idx = find_special_chunk(chunks)

    # 1-based j as in the chunk numbering; chunks[j - 1] is chunk j
    for j in range(b - 1, 0, -1):
        b_corr = int(chunks[j][0])
        if amb_flags[j - 1] or last_idx == j + 1:
            b_corr = 0
        m_j = len(chunks[j - 1])
        x = (int(chunks[j - 1], 2) - b_corr) % (1 << m_j)
        chunks[j - 1] = format(x, f"0{m_j}b")
    return ResolvedEstimate("".join(chunks), last_idx)


def amplitude_from_phase(phi_est: Fraction | float) -> tuple[float, float, float]:
    """``(theta, p_tilde, a_tilde)`` for a phase in [0, 1).

    The amplitude is computed from the phase folded into [0, 1/2], so that the
    two branch readings ``phi`` and ``1 - phi`` give bit-identical results.
    """
    phi = Fraction(phi_est)
    if not 0 <= phi < 1:
        raise ContractError(f"phase must lie in [0, 1), got {phi}")
    folded = min(phi, 1 - phi)
    a = math.sin(math.pi * float(folded))
    return 2 * math.pi * float(phi), a * a, a


@dataclass
class AWQAEResult:
    raw: RawEstimate
    resolved: ResolvedEstimate

    @property
    def a_tilde(self) -> float:
        return self.resolved.a_tilde

    @property
    def p_tilde(self) -> float:
        return self.resolved.p_tilde


def awqae(
    problem: AmplitudeProblem,
    allocation: BitAllocation,
    config: BlockConfig = BlockConfig(),
    **kwargs,
) -> AWQAEResult:
    """Block runs followed by ambiguity resolution."""
    raw = run_awqae(problem, allocation, config, **kwargs)
    return AWQAEResult(raw, resolve(raw.phi_raw, allocation, raw.amb_flags))


def phase_distance(a: Fraction, b: Fraction) -> Fraction:
    d = (a - b) % 1
    return min(d, 1 - d)


@dataclass
class ConfidenceCheck:
    passed: bool
    phi_est: Fraction
    phi_est_perturbed: Fraction
    delta_phi: Fraction
    special_flag: bool
    special_flag_perturbed: bool


def perturbed_confidence_report(
    problem: AmplitudeProblem,
    allocation: BitAllocation,
    config: BlockConfig,
    delta_phi: Fraction | float,
) -> ConfidenceCheck:
    delta = Fraction(delta_phi)
    base = awqae(problem, allocation, config)
    shifted = awqae(
        problem, allocation, config, grover=build_grover(problem, float(delta))
    )
    observed = (shifted.resolved.phi_est - base.resolved.phi_est) % 1
    grid = Fraction(1, 1 << allocation.n_total)
    return ConfidenceCheck(
        phase_distance(observed, delta % 1) <= grid,
        base.resolved.phi_est,
        shifted.resolved.phi_est,
        delta,
        base.resolved.special_flag,
        shifted.resolved.special_flag,
    )


def perturbed_confidence_check(
    problem: AmplitudeProblem,
    allocation: BitAllocation,
    config: BlockConfig,
    delta_phi: Fraction | float,
) -> bool:
    """Rerun with ``exp(2 pi i delta_phi) Q`` and check the estimate moved by ``delta_phi``."""
    return perturbed_confidence_report(problem, allocation, config, delta_phi).passed
