#!/usr/bin/env python3
"""Learned vs evenly spaced selection from a single base configuration.

Trains both strategies at each compression ratio with everything else
held fixed and prints the paired test metrics side by side. The winner
is data dependent, so the script reports the comparison rather than
asserting one.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ris_sparse.config import DatasetConfig, TrainConfig, load_config
from ris_sparse.dataio import gen_data, read_dataset, read_labels
from ris_sparse.evaluate import compare_strategies


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--data", default=None,
                    help="dataset path; generated on the fly if omitted")
    ap.add_argument("--config", default=None,
                    help="base TrainConfig JSON; desk defaults if omitted")
    ap.add_argument("--labels", default=None,
                    help="label cache (beam scheme only)")
    ap.add_argument("--out-dir", default="strategy_comparison")
    ap.add_argument("--r-values", default="0.0625,0.125,0.25,0.5",
                    help="comma-separated compression ratios")
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()

    if args.data is None:
        args.data = os.path.join(args.out_dir, "desk.bin")
        os.makedirs(args.out_dir, exist_ok=True)
        print("generating desk dataset")
        gen_data(DatasetConfig(), args.data)
    data = read_dataset(args.data)

    if args.config is not None:
        base = load_config(args.config, TrainConfig)
    else:
        base = TrainConfig(scheme="extrapolation", strategy="prob",
                           batch=16, n_iter=300 if args.quick else 3000,
                           seed=0, target_mode="same", extrap_iterations=3,
                           extrap_relu_layers=2, extrap_channels=24,
                           eta_omega=1e-3, eta_xi=1e-2,
                           log_every=100, eval_every=1000)

    labels = label_meta = None
    if base.scheme == "beam":
        if args.labels is None:
            raise SystemExit("beam comparison needs --labels")
        labels, label_meta = read_labels(args.labels)

    r_values = tuple(float(v) for v in args.r_values.split(","))
    rows = compare_strategies(data, base, r_values, args.out_dir,
                              labels=labels, label_meta=label_meta)

    metric_name = "nmse" if base.scheme == "extrapolation" else "accuracy"
    by_r = {}
    for r, strategy, metric, *_ in rows:
        by_r.setdefault(r, {})[strategy] = metric
    print(f"\n{'r':>8} {'prob ' + metric_name:>14} {'unif ' + metric_name:>14}")
    for r in sorted(by_r):
        print(f"{r:>8g} {by_r[r]['prob']:>14.4f} {by_r[r]['unif']:>14.4f}")
    print(f"\npaired curves -> {os.path.join(args.out_dir, 'comparison.csv')}")


if __name__ == "__main__":
    main()
