"""Convert a PTB-XL download into the interchange directory layout.

Reads ptbxl_database.csv plus the 100 Hz records and writes one
metadata.csv and one <id>.f32 waveform (single lead, float32) per
recording. A record is labeled "norm" when NORM appears among its scp
codes, with the code's likelihood exported as normal_confidence;
everything else is "atypical". Folds, human validation flags, and
likelihoods pass through untouched so all filtering stays in the loader.

A seeded random set-aside of train-fold records (default 2174) is
dropped from the export entirely; run the loader on the result with
set_aside_count=0.

Needs pandas and wfdb, which are not package dependencies:

    pip install pandas wfdb
    python3 scripts/export_ptbxl.py /data/ptb-xl out/interchange
"""

import argparse
import ast
import csv
import os
import sys

import numpy as np


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("ptbxl_dir",
                        help="directory containing ptbxl_database.csv")
    parser.add_argument("out_dir", help="interchange directory to create")
    parser.add_argument("--lead", default="III",
                        help="signal name to extract (default III)")
    parser.add_argument("--set-aside", type=int, default=2174,
                        help="train records to drop from the export")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for the set-aside draw")
    parser.add_argument("--train-folds", type=int, default=8,
                        help="folds 1..N are train (default 8)")
    return parser.parse_args()


def main():
    args = parse_args()
    try:
        import pandas as pd
        import wfdb
    except ImportError as e:
        sys.exit(f"missing dependency ({e.name}); pip install pandas wfdb")

    table_path = os.path.join(args.ptbxl_dir, "ptbxl_database.csv")
    if not os.path.exists(table_path):
        sys.exit(f"{table_path} not found")
    table = pd.read_csv(table_path, index_col="ecg_id")
    table["scp_codes"] = table["scp_codes"].apply(ast.literal_eval)

    train_ids = table.index[table["strat_fold"] <= args.train_folds].to_numpy()
    if args.set_aside > train_ids.size:
        sys.exit(f"cannot set aside {args.set_aside} of {train_ids.size} "
                 "train records")
    rng = np.random.default_rng(args.seed)
    dropped = set(rng.choice(train_ids, size=args.set_aside, replace=False))
    print(f"{table.shape[0]} records, dropping {len(dropped)} train records "
          f"(seed {args.seed})")

    os.makedirs(args.out_dir, exist_ok=True)
    rows = []
    written = 0
    for ecg_id, row in table.iterrows():
        if ecg_id in dropped:
            continue
        record = wfdb.rdrecord(os.path.join(args.ptbxl_dir, row["filename_lr"]))
        try:
            lead = record.sig_name.index(args.lead)
        except ValueError:
            sys.exit(f"record {ecg_id} has leads {record.sig_name}, "
                     f"no {args.lead}")
        samples = np.asarray(record.p_signal[:, lead], dtype=np.float32)
        samples.tofile(os.path.join(args.out_dir, f"{ecg_id}.f32"))

        codes = row["scp_codes"]
        is_norm = "NORM" in codes
        rows.append({
            "id": ecg_id,
            "fold": int(row["strat_fold"]),
            "validated_by_human": int(bool(row["validated_by_human"])),
            "normal_confidence": float(codes["NORM"]) if is_norm else 0.0,
            "label": "norm" if is_norm else "atypical",
        })
        written += 1
        if written % 1000 == 0:
            print(f"  {written} waveforms written")

    with open(os.path.join(args.out_dir, "metadata.csv"), "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["id", "fold",
                                                "validated_by_human",
                                                "normal_confidence", "label"])
        writer.writeheader()
        writer.writerows(rows)
    folds = {}
    for r in rows:
        split = ("train" if r["fold"] <= args.train_folds
                 else "validation" if r["fold"] == args.train_folds + 1
                 else "test")
        folds[split] = folds.get(split, 0) + 1
    print(f"wrote {written} waveforms + metadata.csv to {args.out_dir}: "
          + ", ".join(f"{k} {v}" for k, v in sorted(folds.items())))


if __name__ == "__main__":
    main()
