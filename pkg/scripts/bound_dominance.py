#!/usr/bin/env python3
"""Empirical generalization error of the mean classifier next to both bound profiles."""
import argparse

from layerbounds.casestudy import GaussianMixtureSpec, RotationStackConfig, gen_bound_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[20, 100, 500])
    ap.add_argument("--datasets", type=int, default=500)
    ap.add_argument("--stacks", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = RotationStackConfig(depth=10, funnel_index=5, funnel_fraction=0.2)
    print(f"{'n':>5} {'gen err':>9} {'3 se':>8} {'KL(L)':>8} {'min W':>8} {'W argmin':>8}")
    for n in args.n:
        spec = GaussianMixtureSpec((0.5, 0.0), 1.0, n)
        rep = gen_bound_report(spec, cfg, args.datasets, args.stacks, args.seed)
        g = rep.gen_error
        print(f"{n:5d} {g.estimate:9.5f} {3 * g.std_error:8.5f} {rep.kl.values[-1]:8.4f} "
              f"{rep.wasserstein.minimum:8.4f} {rep.wasserstein.argmin:8d}")


if __name__ == "__main__":
    main()
