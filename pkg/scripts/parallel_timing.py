"""Wall time of sampled statevector runs against the worker count."""
import argparse
import time

from awqae.engine import BitAllocation, BlockConfig
from awqae.grover import AmplitudeProblem
from awqae.parallel import ParallelPlan, run_blocks_parallel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--allocation", default="4,4,4")
    ap.add_argument("--p", type=float, default=0.37)
    ap.add_argument("--workers", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    alloc = BitAllocation.parse(args.allocation)
    prob = AmplitudeProblem.rotation(args.p)
    cfg = BlockConfig(mode="sampled")
    ref = None
    for w in args.workers:
        best = float("inf")
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            raw = run_blocks_parallel(prob, alloc, cfg, ParallelPlan(w, 0))
            best = min(best, time.perf_counter() - t0)
        ref = ref or raw.phi_raw
        print(f"workers {w:>2}  {best * 1e3:8.1f} ms  phi_raw {raw.phi_raw}"
              f"{'' if raw.phi_raw == ref else '  MISMATCH'}")


if __name__ == "__main__":
    main()
