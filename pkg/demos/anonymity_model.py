"""Anonymity from Poisson arrivals: the window tail, the wait quantiles, and a simulation check."""

from rcbdc.anonmodel import achieved_k, linear_fit, prob_at_least, simulate_waiting, waiting_quantile


def main():
    print("lamT  P(K>=80)  achieved_k")
    for mu in (60, 80, 100, 120, 140):
        print(f"{mu:4d}  {prob_at_least(1.0, mu, 80):.6f}  {achieved_k(1.0, mu)}")

    print("\nwait to k=20 at lam=1")
    for p in (0.5, 0.9, 0.99, 0.999):
        print(f"  p={p}: {waiting_quantile(1.0, 20, p):.3f}")

    sim = simulate_waiting(1.0, 100, 5000, seed=0)
    slope, intercept, r2 = linear_fit(sim.ks[1:], sim.mean_wait[1:])
    print(f"\nsimulated mean wait ~ {slope:.4f} k + {intercept:.3f} (R2 {r2:.6f})")


if __name__ == "__main__":
    main()
