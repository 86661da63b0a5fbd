"""Central-bank verification against bank-side construction as transactions grow."""

import sys

from rcbdc.bench import fit_shape, run_bench
from rcbdc.group import profile_params


def main(profile="prod"):
    params = profile_params(profile)
    sizes = (2, 4, 8, 16, 32, 64)
    rows = run_bench(params, sizes=sizes, reps=10)
    for op in ("cb_verify", "bank_build"):
        times = [r.mean_ns for r in rows if r.operation == op]
        fit = fit_shape(sizes, times)
        print(f"{op:>10}: " + " ".join(f"{t / 1e6:7.2f}" for t in times) + " ms")
        print(f"{'':>10}  intercept {fit.intercept / 1e6:.2f}ms, slope {fit.slope / 1e3:.1f}us/elem, "
              f"R2 {fit.r_squared:.4f}")


if __name__ == "__main__":
    main(*sys.argv[1:])
