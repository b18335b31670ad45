import math
import time
from fractions import Fraction

import numpy as np
import pytest

from awqae import statevector as sv
from awqae.cli import TABLE1, main
from awqae.engine import BitAllocation, BlockConfig, build_block_circuit, grover_cost
from awqae.fullqae import run_full_qae, simulate_full_qae
from awqae.grover import AmplitudeProblem, build_grover
from awqae.harness import compare_random_phases, oracle_equivalence, sweep_exact_grid
from awqae.parallel import ParallelPlan, run_blocks_parallel
from awqae.postprocess import awqae, find_special_chunk, partition

A_PRECISE = 0.9523504170755709
A_PRECISE_EST = 0.9523750127197659
ALLOC = BitAllocation((3, 3, 4))


@pytest.mark.criterion(1, "precise case 411/1024")
def test_precise_case():
    t0 = time.perf_counter()
    assert round(2**10 * math.asin(A_PRECISE) / math.pi) == 411
    prob = AmplitudeProblem.from_phase(Fraction(411, 1024))
    res = awqae(prob, ALLOC)
    full = run_full_qae(prob, 10)
    assert abs(res.a_tilde - A_PRECISE_EST) <= 1e-12
    assert abs(full.a_tilde - A_PRECISE_EST) <= 1e-12
    assert res.a_tilde == full.a_tilde
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.criterion(2, "reference table reproduction")
def test_table_reproduction():
    t0 = time.perf_counter()
    cell = math.pi / 1024  # one 10-bit grid cell, in amplitude units this bounds the slack
    for a_true, a_ref in TABLE1:
        prob = AmplitudeProblem.from_phase(math.asin(a_true) / math.pi)
        res = awqae(prob, ALLOC)
        full = run_full_qae(prob, 10)
        assert res.a_tilde == full.a_tilde
        err_pct = 100 * abs(res.a_tilde - full.a_tilde) / full.a_tilde
        assert f"{err_pct:.2f}" == "0.00"
        if round(res.a_tilde, 4) != a_ref:
            assert abs(res.a_tilde - a_ref) <= cell + 5e-5
    assert time.perf_counter() - t0 < 5.0


@pytest.mark.criterion(3, "exhaustive 8-bit grid sweep, zero failures")
def test_exhaustive_grid_sweep():
    t0 = time.perf_counter()
    allocs = [[4, 4], [2, 2, 2, 2], [3, 3, 2]]
    report = sweep_exact_grid(8, allocs)
    assert report.consistent
    # special flags only where the true index itself carries a trailing 10...0 chunk
    for alloc in allocs:
        for y in range(1, 128):
            res = awqae(AmplitudeProblem.from_phase(Fraction(y, 256)), BitAllocation(tuple(alloc)))
            if res.resolved.special_flag:
                assert find_special_chunk(partition(format(y, "08b"), alloc)) is not None
    assert time.perf_counter() - t0 < 120
    assert report.failures == [], f"{len(report.failures)} failures, e.g. {report.failures[:3]}"


@pytest.mark.criterion(4, "analytic oracle vs statevector, TV < 1e-9")
def test_oracle_equivalence():
    report = oracle_equivalence(60, rng_seed=2024)
    assert report.cases_run >= 50
    assert report.max_tv_distance < 1e-9 and not report.failures


@pytest.mark.criterion(5, "200 random phases agree with full QAE")
def test_randomized_equivalence():
    report = compare_random_phases(200, 10, ALLOC, rng_seed=1)
    assert report.consistent and report.cases_run == 200
    assert report.failures == [], (
        f"{len(report.failures)} failures, {report.special_flag_count} special, "
        f"{report.agreements} agree; e.g. {report.failures[:3]}"
    )


@pytest.mark.criterion(6, "cost accounting for 3,3,4")
def test_cost_accounting():
    c = grover_cost(ALLOC)
    assert c.counting_applications == (7, 56, 960)
    assert c.total_counting_applications == 2**10 - 1
    assert c.max_powers == (4, 32, 512)
    # per-block depth 2**(k + m - 1)
    assert c.max_powers == tuple(2 ** (k + m - 1) for k, m in zip(ALLOC.offsets, ALLOC.m_list))


def _non_special_grid_indices(rng, count, n, alloc):
    out = []
    while len(out) < count:
        y = int(rng.integers(1, 2 ** (n - 1)))
        if y not in out and find_special_chunk(partition(format(y, f"0{n}b"), alloc)) is None:
            out.append(y)
    return out


@pytest.mark.criterion(7, "sampled mode recovers >= 95% of grid phases")
def test_sampled_robustness():
    rng = np.random.default_rng(7)
    ys = _non_special_grid_indices(rng, 50, 10, ALLOC)
    cfg = BlockConfig(mode="sampled", n_shots=1024, rng_seed=11)
    hits = sum(
        awqae(AmplitudeProblem.from_phase(Fraction(y, 1024)), ALLOC, cfg).resolved.index == y
        for y in ys
    )
    assert hits >= 0.95 * len(ys), f"recovered {hits}/{len(ys)}"


@pytest.mark.criterion(8, "worker-count invariance")
@pytest.mark.parametrize("mode", ["exact", "sampled"])
def test_parallel_determinism(mode):
    prob = AmplitudeProblem.rotation(0.3141)
    cfg = BlockConfig(mode=mode)
    outs = [run_blocks_parallel(prob, ALLOC, cfg, ParallelPlan(w, 123)) for w in (1, 2, 4, 8)]
    ref = outs[0]
    for o in outs[1:]:
        assert (o.phi_raw, o.amb_flags, o.b_a) == (ref.phi_raw, ref.amb_flags, ref.b_a)
        assert o.blocks == ref.blocks


@pytest.mark.criterion(9, "quantum counting")
@pytest.mark.parametrize("ntarget,m_true", [(4, 3), (3, 2)])
def test_counting(ntarget, m_true, capsys):
    import json

    code = main(["count", "--ntarget", str(ntarget), "--nmarked", str(m_true),
                 "--allocation", "3,3,4", "--mode", "exact", "--format", "json"])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["M_hat"] == m_true


@pytest.mark.criterion(10, "norm, QFT round trip, Grover unitarity")
def test_invariants():
    rng = np.random.default_rng(10)
    for _ in range(20):
        prob = AmplitudeProblem.rotation(float(rng.uniform()))
        k, m = int(rng.integers(0, 6)), int(rng.integers(2, 5))
        state, _ = build_block_circuit(prob, k, m, BlockConfig())
        assert abs(state.norm_sq() - 1) < 1e-10
    for p in rng.uniform(size=5):
        assert abs(simulate_full_qae(AmplitudeProblem.rotation(float(p)), 8).sum() - 1) < 1e-10

    v = rng.normal(size=2**10) + 1j * rng.normal(size=2**10)
    s = sv.StateVector(10, v / np.linalg.norm(v))
    back = sv.apply_qft(sv.apply_iqft(s, list(range(10))), list(range(10)))
    assert np.max(np.abs(back.amps - s.amps)) < 1e-10

    for p in np.linspace(0, 1, 100):
        q = build_grover(AmplitudeProblem.rotation(float(p)))
        assert np.max(np.abs(q.matrix.conj().T @ q.matrix - np.eye(2))) < 1e-10
        theta = 2 * math.asin(math.sqrt(p))
        ev = np.linalg.eigvals(q.matrix)
        for target in (theta, -theta):
            assert np.min(np.abs(ev - np.exp(1j * target))) < 1e-8
