"""Sweeps that pit windowed estimation against full QAE and the analytic oracle."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .analytic import block_joint_distribution, total_variation
from .engine import BitAllocation, BlockConfig, simulate_block_joint
from .fullqae import run_full_qae
from .grover import AmplitudeProblem, build_grover
from .postprocess import awqae


@dataclass
class SweepReport:
    cases_run: int = 0
    agreements: int = 0
    special_flag_count: int = 0
    max_tv_distance: float = 0.0
    failures: list[tuple] = field(default_factory=list)

    def merge(self, other: "SweepReport") -> "SweepReport":
        return SweepReport(
            self.cases_run + other.cases_run,
            self.agreements + other.agreements,
            self.special_flag_count + other.special_flag_count,
            max(self.max_tv_distance, other.max_tv_distance),
            self.failures + other.failures,
        )

    @property
    def consistent(self) -> bool:
        return self.agreements + len(self.failures) + self.special_flag_count == self.cases_run

    def to_dict(self) -> dict:
        return {
            "cases_run": self.cases_run,
            "agreements": self.agreements,
            "special_flag_count": self.special_flag_count,
            "max_tv_distance": self.max_tv_distance,
            "failures": [
                {"p": p, "allocation": list(alloc), "diagnostic": diag}
                for p, alloc, diag in self.failures
            ],
        }


def _as_alloc(a) -> BitAllocation:
    return a if isinstance(a, BitAllocation) else BitAllocation(tuple(a))


def sweep_exact_grid(
    n_total: int,
    allocations: Iterable,
    config: BlockConfig = BlockConfig(),
    ys: Sequence[int] | None = None,
) -> SweepReport:
    """Run every interior grid phase ``y / 2**n_total`` in (0, 1/2) through both methods.

    A case agrees when the resolved index equals ``y`` and full QAE gives the
    same ``p_tilde``; special-flag cases are tallied, not judged.
    """
    if ys is None:
        ys = range(1, 1 << (n_total - 1))
    report = SweepReport()
    for alloc in map(_as_alloc, allocations):
        if alloc.n_total != n_total:
            raise ValueError(f"allocation {alloc} does not sum to {n_total}")
        for y in ys:
            problem = AmplitudeProblem.from_phase(Fraction(y, 1 << n_total))
            res = awqae(problem, alloc, config)
            report.cases_run += 1
            if res.resolved.special_flag:
                report.special_flag_count += 1
                continue
            full = run_full_qae(problem, n_total, config)
            if res.resolved.index == y and res.p_tilde == full.p_tilde:
                report.agreements += 1
            else:
                report.failures.append((problem.p, alloc.m_list, {
                    "y": y,
                    "phi_raw": res.raw.phi_raw,
                    "amb_flags": res.raw.amb_flags,
                    "phi_est_bits": res.resolved.phi_est_bits,
                    "awqae_index": res.resolved.index,
                    "fullqae_y": full.y,
                }))
    return report


def compare_random_phases(
    trials: int,
    n_total: int,
    allocation,
    rng_seed: int = 0,
    config: BlockConfig = BlockConfig(),
    phases: Sequence[float] | None = None,
) -> SweepReport:
    """Uniform random phases in (0, 1/2), or the supplied ``phases``.

    Non-special trials must give the same ``p_tilde`` as full QAE and an
    amplitude error within ``pi * 2**-(n_total+1)``.
    """
    alloc = _as_alloc(allocation)
    if alloc.n_total != n_total:
        raise ValueError(f"allocation {alloc} does not sum to {n_total}")
    if phases is None:
        rng = np.random.default_rng(rng_seed)
        phases = rng.uniform(0.0, 0.5, size=trials)
    bound = math.pi * 2.0 ** -(n_total + 1) + 1e-12
    report = SweepReport()
    for phi in phases:
        problem = AmplitudeProblem.from_phase(float(phi))
        a_true = math.sin(math.pi * float(phi))
        res = awqae(problem, alloc, config)
        report.cases_run += 1
        if res.resolved.special_flag:
            report.special_flag_count += 1
            continue
        full = run_full_qae(problem, n_total, config)
        err = abs(res.a_tilde - a_true)
        if res.p_tilde == full.p_tilde and err <= bound:
            report.agreements += 1
        else:
            report.failures.append((problem.p, alloc.m_list, {
                "phi": float(phi),
                "phi_raw": res.raw.phi_raw,
                "amb_flags": res.raw.amb_flags,
                "awqae_index": res.resolved.index,
                "fullqae_y": full.y,
                "abs_error": err,
            }))
    return report


def oracle_equivalence(
    n_configs: int,
    rng_seed: int = 0,
    m_range: tuple[int, int] = (2, 4),
    k_range: tuple[int, int] = (0, 6),
    m_start: int = 2,
) -> SweepReport:
    """TV distance between simulated and analytic block laws over random (p, k, m)."""
    rng = np.random.default_rng(rng_seed)
    report = SweepReport()
    for _ in range(n_configs):
        p = float(rng.uniform(0, 1))
        k = int(rng.integers(k_range[0], k_range[1] + 1))
        m = int(rng.integers(m_range[0], m_range[1] + 1))
        problem = AmplitudeProblem.rotation(p)
        cfg = replace(BlockConfig(m_start=m_start), backend="statevector")
        sim = simulate_block_joint(problem, k, m, cfg, build_grover(problem))
        ana = block_joint_distribution(problem, k, m, m_start)
        tv = total_variation(sim, ana)
        report.cases_run += 1
        report.max_tv_distance = max(report.max_tv_distance, tv)
        if tv < 1e-9:
            report.agreements += 1
        else:
            report.failures.append((p, (k, m), {"tv": tv}))
    return report
