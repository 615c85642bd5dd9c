"""Sweep the filter-field benchmark over sizes and kernel widths.

    python3 scripts/bench_sweep.py --iters 3
"""
import argparse
import sys

from freqfusion.bench import run_bench

SIZES = [(16, 64, 64), (64, 64, 64), (64, 128, 128)]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=3)
    ap.add_argument("--kernels", default="3,5,7")
    ap.add_argument("--workers", type=int)
    a = ap.parse_args(argv)
    print("size,k,ns_per_iter,gflops_effective,speedup,workers")
    for dims in SIZES:
        for k in (int(s) for s in a.kernels.split(",")):
            r = run_bench("filter_field", dims, a.iters, kernel_size=k, workers=a.workers)
            print(f"{'x'.join(map(str, dims))},{k},{r.ns_per_iter:.0f},{r.gflops_effective:.3f},{r.speedup:.2f},{r.workers}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
