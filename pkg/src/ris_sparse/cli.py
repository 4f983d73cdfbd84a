"""Command-line entry points: gen, label, train, eval, gradcheck."""

import argparse
import json
import sys

import numpy as np

from .beamsearch import build_codebook, oracle_labels
from .channel import ArrayGeometry
from .config import DatasetConfig, TrainConfig, load_config
from .dataio import file_sha256, gen_data, read_dataset, read_labels, write_labels
from .evaluate import EVAL_MODES
from .training import train_beam, train_extrapolation


def _cmd_gen(args):
    cfg = load_config(args.config, DatasetConfig)
    sha = gen_data(cfg, args.out)
    print(f"wrote {cfg.sample_count} samples to {args.out} (sha256 {sha[:16]})")
    return 0


def _cmd_label(args):
    data = read_dataset(args.data)
    geom = ArrayGeometry(data.meta["n_v"], data.meta["n_h"],
                         data.meta["spacing_over_lambda"])
    codebook = build_codebook(geom, args.codebook_r1, args.codebook_r2)
    labels = oracle_labels(data.h, data.g, codebook, args.sigma2)
    write_labels(args.out, labels, data.sha256, args.codebook_r1,
                 args.codebook_r2, args.sigma2)
    print(f"labeled {labels.size} samples against {codebook.n_beams} beams -> {args.out}")
    return 0


def _cmd_train(args):
    cfg = load_config(args.config, TrainConfig)
    want = "extrapolation" if args.scheme == "extrap" else args.scheme
    if cfg.scheme != want:
        raise SystemExit(f"config scheme {cfg.scheme!r} does not match "
                         f"subcommand {args.scheme!r}")
    data = read_dataset(args.data)
    if cfg.scheme == "extrapolation":
        result = train_extrapolation(data, cfg, out_dir=args.out_dir)
        final = result.report["final"]
        print(f"extrapolation run done: test nmse {final['test_nmse']:.4f} "
              f"-> {args.out_dir}")
    else:
        if not args.labels:
            raise SystemExit("beam training needs --labels")
        labels, meta = read_labels(args.labels)
        result = train_beam(data, labels, cfg, out_dir=args.out_dir,
                            label_meta=meta)
        final = result.report["final"]
        print(f"beam run done: test accuracy {final['test_accuracy']:.4f} "
              f"-> {args.out_dir}")
    return 0


def _cmd_eval(args):
    data = read_dataset(args.data)
    fn = EVAL_MODES[args.mode]
    if args.mode == "rate":
        rows = fn(args.models, data, args.out, bits=args.bits,
                  sigma2=args.sigma2)
    else:
        rows = fn(args.models, data, args.out)
    print(f"{args.mode}: {len(rows)} rows -> {args.out}")
    return 0


def _cmd_gradcheck(args):
    # Deferred import: pulls in the whole model zoo.
    from .verify import run_gradcheck

    worst = run_gradcheck(scale=args.scale, verbose=True)
    ok = worst < 1e-5
    print(f"max rel err {worst:.3e} ({'ok' if ok else 'FAIL'})")
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(
        prog="ris-sparse",
        description="Sparse active-element RIS link: data synthesis, "
                    "selection + network training, evaluation.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic channel dataset")
    g.add_argument("--config", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(fn=_cmd_gen)

    l = sub.add_parser("label", help="exhaustive-search beam labels")
    l.add_argument("--data", required=True)
    l.add_argument("--codebook-r1", type=int, default=2)
    l.add_argument("--codebook-r2", type=int, default=2)
    l.add_argument("--sigma2", type=float, required=True)
    l.add_argument("--out", required=True)
    l.set_defaults(fn=_cmd_label)

    t = sub.add_parser("train", help="train a scheme end to end")
    t.add_argument("scheme", choices=["extrap", "beam"])
    t.add_argument("--data", required=True)
    t.add_argument("--labels", default=None)
    t.add_argument("--config", required=True)
    t.add_argument("--out-dir", required=True)
    t.set_defaults(fn=_cmd_train)

    e = sub.add_parser("eval", help="evaluate saved runs")
    e.add_argument("--mode", choices=sorted(EVAL_MODES), required=True)
    e.add_argument("--models", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--bits", type=int, default=3)
    e.add_argument("--sigma2", type=float, default=None)
    e.set_defaults(fn=_cmd_eval)

    c = sub.add_parser("gradcheck", help="finite-difference gradient audit")
    c.add_argument("--scale", choices=["small"], default="small")
    c.set_defaults(fn=_cmd_gradcheck)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
