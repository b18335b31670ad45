"""Exhaustive grid sweep as a function of the resolution-register width.

With a two-qubit resolution register, phases close to 0 or 1/2 put both
eigenphase branches into the same ancilla bin and some chunks are read from
the wrong branch. Widening the register removes those failures.
"""
import argparse

from awqae.engine import BitAllocation, BlockConfig
from awqae.harness import sweep_exact_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ntotal", type=int, default=8)
    ap.add_argument("--allocations", default="4,4;2,2,2,2;3,3,2")
    ap.add_argument("--mstart", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--show", type=int, default=0, help="print this many failures per row")
    args = ap.parse_args()

    allocs = [BitAllocation.parse(s) for s in args.allocations.split(";")]
    print(f"{'m_start':>7} {'allocation':>10} {'cases':>6} {'agree':>6} {'special':>7} {'fail':>5}")
    for ms in args.mstart:
        for alloc in allocs:
            r = sweep_exact_grid(args.ntotal, [alloc], BlockConfig(m_start=ms))
            print(f"{ms:>7} {str(alloc):>10} {r.cases_run:>6} {r.agreements:>6} "
                  f"{r.special_flag_count:>7} {len(r.failures):>5}")
            for _, _, diag in r.failures[: args.show]:
                print(f"{'':>10} y={diag['y']:<4} raw={diag['phi_raw']} "
                      f"flags={diag['amb_flags']} -> {diag['awqae_index']}")


if __name__ == "__main__":
    main()
