"""Windowed amplitude estimation: per-block circuits, chunk selection, raw phase bits."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping

import numpy as np

from . import statevector as sv
from .analytic import block_joint_distribution
from .errors import CapacityError, ContractError, EmptyConditioningError, ValidationError
from .grover import AmplitudeProblem, GroverOperator, build_grover, build_state_prep

MAX_TOTAL_BITS = 24
EXACT = "exact"
SAMPLED = "sampled"
BACKENDS = ("auto", "analytic", "statevector")

# relative tolerance under which two exact-mode probabilities count as tied
TIE_RTOL = 1e-9
# exact-mode probabilities below this fraction of the peak are treated as zero
NOISE_FLOOR = 1e-14


@dataclass(frozen=True)
class BitAllocation:
    m_list: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        if not self.m_list:
            raise ValidationError("allocation must have at least one block")
        if any(m < 2 for m in self.m_list):
            raise ValidationError(f"every block needs at least 2 bits, got {list(self.m_list)}")
        if self.n_total > MAX_TOTAL_BITS:
            raise CapacityError(f"total bits {self.n_total} exceeds cap {MAX_TOTAL_BITS}")

    @classmethod
    def parse(cls, text: str) -> "BitAllocation":
        try:
            return cls(tuple(int(x) for x in text.split(",") if x.strip()))
        except ValueError as exc:
            raise ValidationError(f"bad allocation {text!r}") from exc

    @property
    def n_total(self) -> int:
        return sum(self.m_list)

    @property
    def offsets(self) -> list[int]:
        out, k = [], 0
        for m in self.m_list:
            out.append(k)
            k += m
        return out

    def __len__(self) -> int:
        return len(self.m_list)

    def __str__(self) -> str:
        return ",".join(map(str, self.m_list))


@dataclass(frozen=True)
class BlockConfig:
    m_start: int = 2
    epsilon: float = 0.9
    n_shots: int = 1024
    b_a: int = 0
    mode: str = EXACT
    rng_seed: int = 0
    backend: str = "auto"

    def __post_init__(self):
        if self.m_start < 2:
            raise ValidationError("m_start must be >= 2")
        if not 0 < self.epsilon <= 1:
            raise ValidationError("epsilon must lie in (0, 1]")
        if self.n_shots < 1:
            raise ValidationError("n_shots must be >= 1")
        if self.b_a not in (0, 1):
            raise ValidationError("b_a must be 0 or 1")
        if self.mode not in (EXACT, SAMPLED):
            raise ValidationError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ValidationError(f"backend must be one of {BACKENDS}")

    @property
    def resolved_backend(self) -> str:
        if self.backend != "auto":
            return self.backend
        return "analytic" if self.mode == EXACT else "statevector"


@dataclass
class BlockResult:
    block_index: int
    k_offset: int
    m: int
    chunk_bits: str
    flag_amb: bool
    t1_star: int
    t2_star: int
    c1: float
    c2: float
    histogram: sv.Histogram | None = None
    distribution: list[float] | None = None
    wall_ms: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return {
            "block_index": self.block_index,
            "k_offset": self.k_offset,
            "m": self.m,
            "chunk_bits": self.chunk_bits,
            "flag_amb": self.flag_amb,
            "t1_star": self.t1_star,
            "t2_star": self.t2_star,
            "c1": self.c1,
            "c2": self.c2,
            "histogram": self.histogram.to_dict() if self.histogram else None,
            "distribution": self.distribution,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BlockResult":
        h = d.get("histogram")
        return cls(
            d["block_index"], d["k_offset"], d["m"], d["chunk_bits"], d["flag_amb"],
            d["t1_star"], d["t2_star"], d["c1"], d["c2"],
            sv.Histogram.from_dict(h) if h else None,
            d.get("distribution"),
        )


@dataclass
class RawEstimate:
    phi_raw: str
    amb_flags: list[bool]
    blocks: list[BlockResult]
    b_a: int = 0


def min_mod(a: int, b: int, n: int) -> int:
    """Minimum on Z/nZ treating 0 and n-1 as neighbours.

    The wrap pair {0, n-1} yields n-1; every other pair falls back to the
    ordinary minimum.
    """
    if n < 2 or not (0 <= a < n and 0 <= b < n):
        raise ContractError(f"need 0 <= a, b < n and n >= 2, got ({a}, {b}, {n})")
    if a == b:
        raise ContractError("min_mod needs distinct arguments")
    if {a, b} == {0, n - 1}:
        return n - 1
    return min(a, b)


def block_seed(master_seed: int, block_index: int) -> int:
    """Stateless seed split: the first 64-bit word of SeedSequence(master, spawn_key=(i,))."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(block_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def build_block_circuit(
    problem: AmplitudeProblem,
    k: int,
    m_i: int,
    config: BlockConfig,
    grover: GroverOperator | None = None,
) -> tuple[sv.StateVector, sv.RegisterLayout]:
    """Pre-measurement state of one block; the resolution register is left unmeasured."""
    if k < 0 or m_i < 1:
        raise ContractError("need k >= 0 and m_i >= 1")
    if k + m_i > MAX_TOTAL_BITS:
        raise CapacityError(f"k + m_i = {k + m_i} exceeds cap {MAX_TOTAL_BITS}")
    q = grover or build_grover(problem)
    layout = sv.RegisterLayout.contiguous(config.m_start, m_i, problem.n_target)
    state = sv.new_state(layout.num_qubits)
    tgt = list(layout.target)

    state = sv.apply_unitary(state, build_state_prep(problem), tgt)

    for qb in layout.resolution:
        state = sv.apply_single(state, sv.H, qb)
    for j, qb in enumerate(layout.resolution):
        state = sv.apply_controlled_unitary(state, q.power(1 << j), qb, tgt, check=False)
    state = sv.apply_iqft(state, layout.resolution)
    state = sv.cnot(state, layout.resolution[-1], layout.ancilla)

    for qb in layout.counting:
        state = sv.apply_single(state, sv.H, qb)
    for j, qb in enumerate(layout.counting):
        state = sv.apply_controlled_unitary(state, q.power(1 << (j + k)), qb, tgt, check=False)
    state = sv.apply_iqft(state, layout.counting)
    return state, layout


def simulate_block_joint(
    problem: AmplitudeProblem,
    k: int,
    m_i: int,
    config: BlockConfig,
    grover: GroverOperator | None = None,
) -> np.ndarray:
    """Joint (ancilla, counting) law from the simulated circuit, shape ``(2, 2**m_i)``."""
    state, layout = build_block_circuit(problem, k, m_i, config, grover)
    flat = sv.marginal_distribution(state, [*layout.counting, layout.ancilla])
    return flat.reshape(2, 1 << m_i)


def block_joint(
    problem: AmplitudeProblem,
    k: int,
    m_i: int,
    config: BlockConfig,
    grover: GroverOperator | None = None,
) -> np.ndarray:
    if config.resolved_backend == "statevector":
        return simulate_block_joint(problem, k, m_i, config, grover)
    shift = grover.phase_shift if grover is not None else 0.0
    return block_joint_distribution(problem, k, m_i, config.m_start, shift)


def _pick(candidates: np.ndarray, rng: np.random.Generator) -> int:
    if len(candidates) == 1:
        return int(candidates[0])
    return int(rng.choice(candidates))


def top_two(weights: np.ndarray, rng: np.random.Generator) -> tuple[int, int]:
    """Most and second-most likely outcomes; ties broken with ``rng``."""
    w = np.asarray(weights, dtype=float)
    best = w.max()
    if best <= 0:
        raise EmptyConditioningError("no weight to select from")
    t1 = _pick(np.flatnonzero(w >= best * (1 - TIE_RTOL)), rng)
    rest = w.copy()
    rest[t1] = -np.inf
    if len(rest) == 1:
        return t1, t1
    best2 = rest.max()
    if best2 <= 0:
        return t1, int(np.flatnonzero(rest == best2)[0])
    return t1, _pick(np.flatnonzero(rest >= best2 * (1 - TIE_RTOL)), rng)


def _as_weights(weights, m_i: int) -> np.ndarray:
    if isinstance(weights, sv.Histogram):
        weights = weights.counts
    if isinstance(weights, Mapping):
        w = np.zeros(1 << m_i)
        for t, c in weights.items():
            if not 0 <= int(t) < (1 << m_i):
                raise ValidationError(f"outcome {t} does not fit in {m_i} bits")
            w[int(t)] = c
        return w
    w = np.asarray(weights, dtype=float)
    if w.shape != (1 << m_i,):
        raise ValidationError(f"expected {1 << m_i} weights, got shape {w.shape}")
    return w


def select_chunk(
    weights,
    m_i: int,
    epsilon: float,
    is_last_block: bool,
    rng: np.random.Generator | int | None = None,
) -> tuple[str, bool, int, int]:
    """Pick a block's chunk from counts (or probabilities).

    Returns ``(chunk_bits, flag_amb, t1_star, t2_star)`` with ``chunk_bits``
    MSB-first. An ambiguous block that is not the last one reports
    ``min_mod(t1, t2)``; otherwise ``t1``.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    w = _as_weights(weights, m_i)
    if w.sum() <= 0:
        raise EmptyConditioningError("empty histogram: no shots survived post-selection")
    t1, t2 = top_two(w, rng)
    c1, c2 = w[t1], w[t2]
    flag = bool(t1 != t2 and c2 / c1 > epsilon)
    est = min_mod(t1, t2, 1 << m_i) if flag and not is_last_block else t1
    return format(est, f"0{m_i}b"), flag, t1, t2


def run_block(
    problem: AmplitudeProblem,
    block_index: int,
    allocation: BitAllocation,
    config: BlockConfig,
    grover: GroverOperator | None = None,
) -> BlockResult:
    """Run block ``block_index`` (0-based) in isolation; seeded from ``(rng_seed, block_index)``."""
    t0 = time.perf_counter()
    k = allocation.offsets[block_index]
    m_i = allocation.m_list[block_index]
    is_last = block_index == len(allocation) - 1
    rng = np.random.default_rng(block_seed(config.rng_seed, block_index))
    joint = block_joint(problem, k, m_i, config, grover)

    hist = None
    dist = None
    if config.mode == SAMPLED:
        flat = np.clip(joint.reshape(-1), 0, None)
        draws = rng.multinomial(config.n_shots, flat / flat.sum()).reshape(2, 1 << m_i)
        kept = draws[config.b_a]
        hist = sv.Histogram(
            {int(t): int(c) for t, c in enumerate(kept) if c},
            int(kept.sum()),
            int(draws[1 - config.b_a].sum()),
        )
        if hist.total_kept == 0:
            raise EmptyConditioningError(
                f"block {block_index}: no shots with ancilla={config.b_a}", block_index
            )
        weights = kept.astype(float)
    else:
        cond = joint[config.b_a]
        mass = cond.sum()
        if mass < 1e-12:
            raise EmptyConditioningError(
                f"block {block_index}: ancilla={config.b_a} has zero probability", block_index
            )
        weights = cond / mass
        weights = np.where(weights < NOISE_FLOOR * weights.max(), 0.0, weights)
        dist = [float(x) for x in weights]

    bits, flag, t1, t2 = select_chunk(weights, m_i, config.epsilon, is_last, rng)
    return BlockResult(
        block_index, k, m_i, bits, flag, t1, t2, float(weights[t1]), float(weights[t2]),
        hist, dist, (time.perf_counter() - t0) * 1e3,
    )


def _collect(blocks: Iterable[BlockResult], b_a: int) -> RawEstimate:
    blocks = sorted(blocks, key=lambda b: b.block_index)
    return RawEstimate(
        "".join(b.chunk_bits for b in blocks), [b.flag_amb for b in blocks], blocks, b_a
    )


def run_awqae(
    problem: AmplitudeProblem,
    allocation: BitAllocation,
    config: BlockConfig = BlockConfig(),
    *,
    grover: GroverOperator | None = None,
    phase_shift: float = 0.0,
    map_fn: Callable = map,
) -> RawEstimate:
    """Run every block and concatenate chunks MSB-chunk first.

    If any block ends with nothing after ancilla post-selection, the whole run
    is repeated once with the other ancilla value, which targets the other
    eigenphase branch.
    """
    q = grover or build_grover(problem, phase_shift)
    if config.resolved_backend == "statevector":
        q.prepopulate(1 << (allocation.n_total - 1))

    def attempt(cfg: BlockConfig) -> RawEstimate:
        run = lambda i: run_block(problem, i, allocation, cfg, q)  # noqa: E731
        return _collect(map_fn(run, range(len(allocation))), cfg.b_a)

    try:
        return attempt(config)
    except EmptyConditioningError:
        return attempt(replace(config, b_a=1 - config.b_a))


@dataclass
class CostReport:
    allocation: tuple[int, ...]
    m_start: int
    n_target: int
    blocks: list[dict]
    total_counting_applications: int
    total_resolution_applications: int
    max_qubits_per_block: int
    full_qae: dict

    @property
    def counting_applications(self) -> tuple[int, ...]:
        return tuple(b["counting_applications"] for b in self.blocks)

    @property
    def max_powers(self) -> tuple[int, ...]:
        return tuple(b["max_power"] for b in self.blocks)

    def to_dict(self) -> dict:
        return {
            "allocation": list(self.allocation),
            "m_start": self.m_start,
            "n_target": self.n_target,
            "blocks": self.blocks,
            "total_counting_applications": self.total_counting_applications,
            "total_resolution_applications": self.total_resolution_applications,
            "max_qubits_per_block": self.max_qubits_per_block,
            "full_qae": self.full_qae,
        }


def grover_cost(allocation: BitAllocation, m_start: int = 2, n_target: int = 1) -> CostReport:
    """Count controlled-Q applications and the largest power used in each block.

    The largest power ``2**(k_j + m_j - 1)`` sets the depth of block ``j``; the
    counting totals telescope to ``2**n - 1``, the same budget as one
    monolithic QAE circuit.
    """
    blocks = []
    for i, (k, m) in enumerate(zip(allocation.offsets, allocation.m_list)):
        blocks.append({
            "block": i + 1,
            "k_offset": k,
            "m": m,
            "qubits": m_start + m + n_target + 1,
            "powers": [1 << (j + k) for j in range(m)],
            "resolution_applications": (1 << m_start) - 1,
            "counting_applications": (1 << k) * ((1 << m) - 1),
            "max_power": 1 << (k + m - 1),
        })
    n = allocation.n_total
    return CostReport(
        allocation.m_list,
        m_start,
        n_target,
        blocks,
        sum(b["counting_applications"] for b in blocks),
        sum(b["resolution_applications"] for b in blocks),
        max(b["qubits"] for b in blocks),
        {
            "counting_qubits": n,
            "qubits": n + n_target,
            "applications": (1 << n) - 1,
            "max_power": 1 << (n - 1),
        },
    )

