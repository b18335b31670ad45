import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from awqae import statevector as sv
from awqae.engine import (
    BitAllocation,
    BlockConfig,
    block_seed,
    build_block_circuit,
    grover_cost,
    min_mod,
    run_awqae,
    run_block,
    select_chunk,
    simulate_block_joint,
)
from awqae.errors import CapacityError, ContractError, EmptyConditioningError, ValidationError
from awqae.grover import AmplitudeProblem


def test_min_mod_cases():
    assert min_mod(3, 5, 8) == 3
    assert min_mod(0, 7, 8) == 7
    assert min_mod(7, 0, 8) == 7
    assert min_mod(0, 1, 8) == 0
    with pytest.raises(ContractError):
        min_mod(4, 4, 8)
    with pytest.raises(ContractError):
        min_mod(0, 8, 8)


def test_allocation_validation():
    assert BitAllocation.parse("3,3,4").offsets == [0, 3, 6]
    with pytest.raises(ValidationError):
        BitAllocation.parse("1,9")
    with pytest.raises(ValidationError):
        BitAllocation.parse("a,b")
    with pytest.raises(CapacityError):
        BitAllocation((13, 12))


def test_config_validation():
    for bad in ({"epsilon": 0}, {"m_start": 1}, {"b_a": 2}, {"mode": "fast"}, {"n_shots": 0}):
        with pytest.raises(ValidationError):
            BlockConfig(**bad)
    assert BlockConfig().resolved_backend == "analytic"
    assert BlockConfig(mode="sampled").resolved_backend == "statevector"


def test_block_circuit_half():
    joint = simulate_block_joint(AmplitudeProblem.rotation(0.5), 0, 2, BlockConfig())
    expected = np.zeros((2, 4))
    expected[0, 1] = expected[1, 3] = 0.5
    np.testing.assert_allclose(joint, expected, atol=1e-12)


def test_block_circuit_p_zero():
    state, layout = build_block_circuit(AmplitudeProblem.rotation(0.0), 3, 3, BlockConfig())
    assert sv.marginal_distribution(state, [layout.ancilla])[0] == pytest.approx(1, abs=1e-12)
    assert sv.marginal_distribution(state, layout.counting)[0] == pytest.approx(1, abs=1e-12)
    assert state.norm_sq() == pytest.approx(1, abs=1e-10)


def test_block_circuit_shifted_grid():
    joint = simulate_block_joint(AmplitudeProblem.rotation(0.5), 2, 2, BlockConfig())
    cond = joint[0] / joint[0].sum()
    assert cond[0] == pytest.approx(1, abs=1e-12)


def test_block_circuit_capacity():
    with pytest.raises(CapacityError):
        build_block_circuit(AmplitudeProblem.rotation(0.3), 20, 5, BlockConfig())


def test_select_chunk_examples():
    assert select_chunk({5: 600, 6: 590}, 3, 0.9, False, 0) == ("101", True, 5, 6)
    bits, flag, *_ = select_chunk({0: 510, 7: 495}, 3, 0.9, False, 0)
    assert (bits, flag) == ("111", True)
    bits, flag, *_ = select_chunk({2: 900, 3: 100}, 3, 0.9, False, 0)
    assert (bits, flag) == ("010", False)


def test_select_chunk_last_block_keeps_top():
    bits, flag, t1, _ = select_chunk({0: 510, 7: 495}, 3, 0.9, True, 0)
    assert flag and bits == "000" and t1 == 0


def test_select_chunk_empty():
    with pytest.raises(EmptyConditioningError):
        select_chunk({}, 3, 0.9, False, 0)
    with pytest.raises(ValidationError):
        select_chunk({9: 3}, 3, 0.9, False, 0)


def test_select_chunk_accepts_histogram():
    h = sv.Histogram({2: 900, 3: 100}, 1000, 24)
    assert select_chunk(h, 2, 0.9, False, 0)[0] == "10"


def test_run_awqae_examples():
    raw = run_awqae(AmplitudeProblem.rotation(0.5), BitAllocation((2, 2)))
    assert raw.phi_raw == "0100" and raw.amb_flags == [False, False]
    assert run_awqae(AmplitudeProblem.rotation(0.0), BitAllocation((2, 2))).phi_raw == "0000"
    p = math.sin(math.pi * 3 / 16) ** 2
    raw = run_awqae(AmplitudeProblem.rotation(p), BitAllocation((2, 2)))
    assert raw.phi_raw == "0111"
    assert [b.chunk_bits for b in raw.blocks] == ["01", "11"]


def test_run_awqae_backends_agree():
    prob = AmplitudeProblem.rotation(0.37)
    alloc = BitAllocation((3, 3, 2))
    a = run_awqae(prob, alloc, BlockConfig(backend="analytic"))
    b = run_awqae(prob, alloc, BlockConfig(backend="statevector"))
    assert a.phi_raw == b.phi_raw and a.amb_flags == b.amb_flags


def test_p_one_flips_ancilla():
    raw = run_awqae(AmplitudeProblem.rotation(1.0), BitAllocation((2, 2)))
    assert raw.b_a == 1
    assert raw.phi_raw == "1000"


def test_blocks_are_independent():
    prob = AmplitudeProblem.rotation(0.61)
    alloc = BitAllocation((3, 3, 4))
    cfg = BlockConfig(mode="sampled", rng_seed=5)
    full = run_awqae(prob, alloc, cfg)
    alone = run_block(prob, 1, alloc, cfg)
    assert alone == full.blocks[1]


def test_sampled_shot_accounting():
    prob = AmplitudeProblem.rotation(0.3)
    cfg = BlockConfig(mode="sampled", n_shots=777, rng_seed=1)
    r = run_block(prob, 0, BitAllocation((3, 3)), cfg)
    assert r.histogram.total_kept + r.histogram.total_discarded == 777
    assert sum(r.histogram.counts.values()) == r.histogram.total_kept


def test_block_seed_is_stateless():
    assert block_seed(7, 2) == block_seed(7, 2)
    assert len({block_seed(7, i) for i in range(8)}) == 8
    assert block_seed(7, 0) != block_seed(8, 0)


def test_cost_examples():
    c = grover_cost(BitAllocation((3, 3, 4)))
    assert c.counting_applications == (7, 56, 960)
    assert c.total_counting_applications == 2**10 - 1
    assert c.total_resolution_applications == 9
    assert c.max_powers == (4, 32, 512)
    c = grover_cost(BitAllocation((10,)))
    assert c.counting_applications == (1023,) and c.max_powers == (512,)
    assert grover_cost(BitAllocation((2, 2))).max_powers == (2, 8)


@given(st.lists(st.integers(2, 6), min_size=1, max_size=4))
def test_cost_telescopes(ms):
    c = grover_cost(BitAllocation(tuple(ms)))
    assert c.total_counting_applications == 2 ** sum(ms) - 1 == c.full_qae["applications"]


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(0, 4), st.integers(2, 3), st.integers(0, 2**31))
def test_sampled_block_histogram_valid(p, k, m, seed):
    cfg = BlockConfig(mode="sampled", n_shots=256, rng_seed=seed)
    alloc = BitAllocation((2,) * (k // 2) + (m,)) if k >= 2 else BitAllocation((m,))
    r = run_block(AmplitudeProblem.rotation(p), len(alloc) - 1, alloc, cfg)
    assert all(0 <= t < 2**r.m for t in r.histogram.counts)
    assert len(r.chunk_bits) == r.m
