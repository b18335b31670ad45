import pytest

from awqae.engine import BitAllocation, BlockConfig, run_awqae
from awqae.errors import ValidationError
from awqae.grover import AmplitudeProblem
from awqae.parallel import WORKERS_ENV, ParallelPlan, default_workers, run_blocks_parallel

PROB = AmplitudeProblem.rotation(0.713)
ALLOC = BitAllocation((3, 3, 4))


@pytest.mark.parametrize("mode", ["exact", "sampled"])
def test_worker_count_invariance(mode):
    cfg = BlockConfig(mode=mode)
    outs = [run_blocks_parallel(PROB, ALLOC, cfg, ParallelPlan(w, 42)) for w in (1, 2, 4, 8)]
    for o in outs[1:]:
        assert o.phi_raw == outs[0].phi_raw and o.amb_flags == outs[0].amb_flags
        assert [b.histogram for b in o.blocks] == [b.histogram for b in outs[0].blocks]


def test_matches_sequential():
    cfg = BlockConfig(mode="sampled", rng_seed=42)
    seq = run_awqae(PROB, ALLOC, cfg)
    par = run_blocks_parallel(PROB, ALLOC, cfg, ParallelPlan(3, 42))
    assert par.phi_raw == seq.phi_raw and len(par.phi_raw) == 10
    assert [b.block_index for b in par.blocks] == [0, 1, 2]


def test_plan_validation_and_seeds():
    with pytest.raises(ValidationError):
        ParallelPlan(0)
    assert ParallelPlan(2, 5).block_seeds(3) == ParallelPlan(7, 5).block_seeds(3)


def test_default_workers_env(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "4")
    assert default_workers() == 4
    monkeypatch.setenv(WORKERS_ENV, "x")
    with pytest.raises(ValidationError):
        default_workers()
    monkeypatch.delenv(WORKERS_ENV)
    assert default_workers() == 1
