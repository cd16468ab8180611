#!/usr/bin/env python3
"""Add-a-layer and split-a-layer sweeps for Dropout and Gaussian-noise panels.

Writes one CSV per (sweep, regularization) pair into --outdir, ready to plot.
"""
import argparse
import os

from layerbounds.experiments import ExperimentConfig, emit, run

PANELS = {
    "dropout": {"type": "dropout", "delta": 0.5},
    "noise": {"type": "noise", "eps": 1.0, "act_sup": 1.0},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="sweeps")
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--eps", type=float, default=1.0)
    ap.add_argument("--B", type=int, default=2)
    args = ap.parse_args()
    PANELS["dropout"]["delta"] = args.delta
    PANELS["noise"]["eps"] = args.eps
    os.makedirs(args.outdir, exist_ok=True)

    for kind in ("add_layer_sweep", "split_layer_sweep"):
        for name, reg in PANELS.items():
            report = run(ExperimentConfig.from_dict({"kind": kind, "regularization": reg, "B": args.B}))
            col = report.columns[0]
            best = min(report.rows, key=lambda r: r["bound"])
            base = report.rows[0]["baseline_bound"]
            print(f"{kind:18s} {name:8s} best {col}={best[col]:2d} bound={best['bound']:.4f} "
                  f"(baseline {base:.4f})")
            emit(report, "csv", os.path.join(args.outdir, f"{kind}_{name}.csv"))


if __name__ == "__main__":
    main()
