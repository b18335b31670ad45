"""Monolithic QPE-based amplitude estimation, the comparison baseline."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import statevector as sv
from .analytic import full_qae_distribution
from .engine import EXACT, BlockConfig, block_seed
from .errors import CapacityError
from .grover import AmplitudeProblem, GroverOperator, build_grover, build_state_prep
from .postprocess import amplitude_from_phase

MAX_SIM_COUNTING = 12

__all__ = ["FullQaeResult", "run_full_qae", "simulate_full_qae", "full_qae_distribution"]


@dataclass
class FullQaeResult:
    y: int
    m: int
    distribution: np.ndarray | None = None
    histogram: sv.Histogram | None = None

    @property
    def phi(self) -> Fraction:
        return Fraction(self.y, 1 << self.m)

    @property
    def p_tilde(self) -> float:
        return amplitude_from_phase(self.phi)[1]

    @property
    def a_tilde(self) -> float:
        return amplitude_from_phase(self.phi)[2]

    def to_dict(self) -> dict:
        return {"y": self.y, "m": self.m, "phi": str(self.phi),
                "p_tilde": self.p_tilde, "a_tilde": self.a_tilde}


def simulate_full_qae(
    problem: AmplitudeProblem, m: int, grover: GroverOperator | None = None
) -> np.ndarray:
    """Counting-register law of the simulated QAE circuit."""
    if not 1 <= m <= MAX_SIM_COUNTING:
        raise CapacityError(f"full QAE simulation supports 1..{MAX_SIM_COUNTING} counting qubits")
    q = grover or build_grover(problem)
    tgt = list(range(problem.n_target))
    cnt = list(range(problem.n_target, problem.n_target + m))
    state = sv.new_state(problem.n_target + m)
    state = sv.apply_unitary(state, build_state_prep(problem), tgt)
    for qb in cnt:
        state = sv.apply_single(state, sv.H, qb)
    for j, qb in enumerate(cnt):
        state = sv.apply_controlled_unitary(state, q.power(1 << j), qb, tgt, check=False)
    state = sv.apply_iqft(state, cnt)
    return sv.marginal_distribution(state, cnt)


def _argmax_low(dist: np.ndarray) -> int:
    # near-equal mirror peaks resolve to the smaller outcome
    return int(np.flatnonzero(dist >= dist.max() * (1 - 1e-9))[0])


def run_full_qae(
    problem: AmplitudeProblem,
    m: int,
    config: BlockConfig = BlockConfig(),
) -> FullQaeResult:
    if config.resolved_backend == "statevector":
        dist = simulate_full_qae(problem, m)
    else:
        if m > 20:
            raise CapacityError("analytic full QAE supports at most 20 counting bits")
        dist = full_qae_distribution(problem, m)
    if config.mode == EXACT:
        return FullQaeResult(_argmax_low(dist), m, dist)
    rng = np.random.default_rng(block_seed(config.rng_seed, 0))
    hist = sv.sample(dist / dist.sum(), config.n_shots, rng)
    top = max(hist.counts.values())
    y = min(t for t, c in hist.counts.items() if c == top)
    return FullQaeResult(y, m, dist, hist)
