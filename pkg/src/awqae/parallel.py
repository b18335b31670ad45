"""Thread-pool execution of independent estimation blocks.

Block ``i`` is seeded from ``block_seed(master_seed, i)`` alone, so results do
not depend on how many workers run or in which order blocks finish.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .engine import (
    BitAllocation,
    BlockConfig,
    RawEstimate,
    block_seed,
    run_awqae,
)
from .errors import AWQAEError, EmptyConditioningError, ValidationError
from .grover import AmplitudeProblem, build_grover

WORKERS_ENV = "AWQAE_WORKERS"


class BlockExecutionError(AWQAEError):
    def __init__(self, block_index: int, cause: BaseException):
        super().__init__(f"block {block_index} failed: {cause!r}")
        self.block_index = block_index
        self.__cause__ = cause


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc
    return max(1, n)


@dataclass(frozen=True)
class ParallelPlan:
    worker_count: int = 1
    master_seed: int = 0

    def __post_init__(self):
        if self.worker_count < 1:
            raise ValidationError("worker_count must be >= 1")

    def block_seeds(self, n_blocks: int) -> list[int]:
        return [block_seed(self.master_seed, i) for i in range(n_blocks)]


def run_blocks_parallel(
    problem: AmplitudeProblem,
    allocation: BitAllocation,
    config: BlockConfig,
    plan: ParallelPlan,
    phase_shift: float = 0.0,
) -> RawEstimate:
    cfg = replace(config, rng_seed=plan.master_seed)
    q = build_grover(problem, phase_shift)
    # fill the power cache up front so workers only read it
    q.prepopulate(1 << (allocation.n_total - 1))

    with ThreadPoolExecutor(max_workers=plan.worker_count) as pool:
        def map_fn(fn, indices):
            def task(i: int):
                try:
                    return fn(i)
                except EmptyConditioningError:
                    raise
                except Exception as exc:
                    raise BlockExecutionError(i, exc) from exc

            return list(pool.map(task, indices))

        return run_awqae(problem, allocation, cfg, grover=q, map_fn=map_fn)
