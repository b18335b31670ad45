"""Windowed quantum amplitude estimation on a dense statevector simulator."""
from .analytic import block_joint_distribution, full_qae_distribution, qpe_distribution
from .engine import (
    BitAllocation,
    BlockConfig,
    BlockResult,
    RawEstimate,
    grover_cost,
    min_mod,
    run_awqae,
    select_chunk,
)
from .errors import (
    AWQAEError,
    CapacityError,
    ContractError,
    EmptyConditioningError,
    ValidationError,
)
from .fullqae import run_full_qae
from .grover import AmplitudeProblem, GroverOperator, build_grover, eigenphases
from .parallel import ParallelPlan, run_blocks_parallel
from .postprocess import (
    ResolvedEstimate,
    amplitude_from_phase,
    awqae,
    perturbed_confidence_check,
    resolve,
)

__version__ = "0.1.0"
