#!/usr/bin/env python3
"""End-to-end desk-scale pipeline: data, labels, both schemes, all reports.

Generates a 16-element, 16-subcarrier dataset, trains the extrapolation
scheme and the beam classifier with learned selection, then emits every
evaluation CSV into <out-dir>/reports. Takes a few minutes with the
default iteration counts; use --quick for a smoke-test pass.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from ris_sparse.beamsearch import build_codebook, oracle_labels
from ris_sparse.channel import ArrayGeometry
from ris_sparse.config import DatasetConfig, TrainConfig
from ris_sparse.dataio import gen_data, read_dataset, read_labels, write_labels
from ris_sparse.evaluate import EVAL_MODES
from ris_sparse.training import train_beam, train_extrapolation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="desk_pipeline")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--quick", action="store_true",
                    help="tiny iteration counts, minutes -> seconds")
    args = ap.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    data_path = os.path.join(args.out_dir, "desk.bin")
    labels_path = os.path.join(args.out_dir, "labels.bin")
    models_dir = os.path.join(args.out_dir, "models")
    reports_dir = os.path.join(args.out_dir, "reports")
    os.makedirs(reports_dir, exist_ok=True)

    ds_cfg = DatasetConfig(seed=args.seed)
    print(f"generating {ds_cfg.sample_count} samples "
          f"({ds_cfg.n_elements} elements, {ds_cfg.k_subcarriers} subcarriers)")
    gen_data(ds_cfg, data_path)
    data = read_dataset(data_path)

    geom = ArrayGeometry(ds_cfg.n_v, ds_cfg.n_h, ds_cfg.spacing_over_lambda)
    codebook = build_codebook(geom, 2, 2)
    labels = oracle_labels(data.h, data.g, codebook, 1e-3)
    write_labels(labels_path, labels, data.sha256, 2, 2, 1e-3)
    labels, label_meta = read_labels(labels_path)
    print(f"labeled against {codebook.n_beams} beams")

    n_iter_ext = 300 if args.quick else 3000
    n_iter_beam = 300 if args.quick else 3000
    ext_cfg = TrainConfig(scheme="extrapolation", r=0.5, strategy="prob",
                          batch=16, n_iter=n_iter_ext, seed=args.seed,
                          target_mode="same", extrap_iterations=3,
                          extrap_relu_layers=2, extrap_channels=24,
                          eta_omega=1e-3, eta_xi=1e-2,
                          log_every=100, eval_every=500)
    print(f"training extrapolation ({n_iter_ext} iterations)")
    res = train_extrapolation(data, ext_cfg,
                              out_dir=os.path.join(models_dir, "extrap_r05"))
    print(f"  test nmse {res.report['final']['test_nmse']:.4f}")

    beam_cfg = TrainConfig(scheme="beam", r=0.25, strategy="prob",
                           batch=128, n_iter=n_iter_beam, seed=args.seed,
                           target_mode="same", beam_hidden=(512, 256),
                           dropout=0.2, window=4,
                           eta_omega=1e-3, eta_xi=1e-2,
                           log_every=100, eval_every=500)
    print(f"training beam classifier ({n_iter_beam} iterations)")
    res = train_beam(data, labels, beam_cfg, label_meta=label_meta,
                     out_dir=os.path.join(models_dir, "beam_r025"))
    print(f"  test accuracy {res.report['final']['test_accuracy']:.4f}")

    for mode, fn in EVAL_MODES.items():
        out_csv = os.path.join(reports_dir, f"{mode}.csv")
        rows = fn(models_dir, data, out_csv)
        print(f"  {mode}: {len(rows)} rows -> {out_csv}")
    print("done")


if __name__ == "__main__":
    main()
