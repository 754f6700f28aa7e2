#!/usr/bin/env python3
"""Convert raw Planetoid citation files into a graph-bundle directory.

Expects the eight standard files for a dataset NAME in --raw-dir::

    ind.NAME.x  ind.NAME.tx  ind.NAME.allx   (scipy sparse feature blocks)
    ind.NAME.y  ind.NAME.ty  ind.NAME.ally   (one-hot label blocks)
    ind.NAME.graph                            (dict: node -> neighbor list)
    ind.NAME.test.index                       (one test node id per line)

and writes a bundle with the standard semi-supervised split: the first
len(y) nodes are train, the following 500 are val, and the ids listed in
test.index are test.

Quirks handled:

* test.index is a permutation; feature/label rows of tx/ty are stored in
  that order and are re-sorted here.
* some datasets (citeseer) omit isolated nodes from test.index; the gaps
  get zero features, label 0, and belong to no mask.
* neighbor lists may repeat an edge or include self-loops; both are
  dropped (normalization re-adds self-loops).

Usage::

    python tools/convert_planetoid.py --raw-dir raw/ --name cora --out data/cora
"""
from __future__ import annotations

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def _load_pickle(path: Path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def load_planetoid(raw_dir: Path, name: str):
    """Return (features f32 dense, labels int64, train/val/test id lists,
    undirected edge pair list)."""
    objects = {}
    for suffix in ("x", "y", "tx", "ty", "allx", "ally", "graph"):
        objects[suffix] = _load_pickle(raw_dir / f"ind.{name}.{suffix}")
    test_idx = np.array(
        [int(line) for line in (raw_dir / f"ind.{name}.test.index").read_text().split()],
        dtype=np.int64,
    )
    test_sorted = np.sort(test_idx)

    tx, ty = objects["tx"], objects["ty"]
    span = int(test_sorted[-1]) - int(test_sorted[0]) + 1
    if span != len(test_idx):
        # gap-fill isolated test nodes absent from test.index
        offset = int(test_sorted[0])
        tx_full = sp.lil_matrix((span, tx.shape[1]), dtype=np.float32)
        tx_full[test_sorted - offset] = tx
        tx = tx_full.tocsr()
        ty_full = np.zeros((span, ty.shape[1]), dtype=ty.dtype)
        ty_full[test_sorted - offset] = ty
        ty = ty_full

    features = sp.vstack((objects["allx"], tx)).tolil()
    features[test_idx] = features[test_sorted]
    onehot = np.vstack((objects["ally"], ty))
    onehot[test_idx] = onehot[test_sorted]

    n = features.shape[0]
    labels = np.argmax(onehot, axis=1).astype(np.int64)

    pairs = set()
    for src, neighbors in objects["graph"].items():
        for dst in neighbors:
            if src == dst or not (0 <= dst < n):
                continue
            pairs.add((src, dst) if src < dst else (dst, src))

    n_train = objects["y"].shape[0]
    train_ids = list(range(n_train))
    val_ids = list(range(n_train, n_train + 500))
    test_ids = [int(i) for i in test_sorted]
    return (
        np.asarray(features.todense(), dtype=np.float32),
        labels,
        train_ids,
        val_ids,
        test_ids,
        sorted(pairs),
    )


def write_bundle_files(out_dir: Path, features, labels, train_ids, val_ids,
                       test_ids, pairs, row_normalize: bool = True) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    n, d = features.shape
    meta = {
        "num_nodes": int(n),
        "num_features": int(d),
        "num_classes": int(labels.max()) + 1,
        "row_normalize": row_normalize,
        "features_format": "bin",
    }
    with open(out_dir / "meta.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(out_dir / "edges.tsv", "w", encoding="utf-8", newline="\n") as f:
        for src, dst in pairs:
            f.write(f"{src}\t{dst}\n")
    features.astype("<f4").tofile(out_dir / "features.bin")
    with open(out_dir / "labels.tsv", "w", encoding="utf-8", newline="\n") as f:
        for node, cls in enumerate(labels):
            f.write(f"{node}\t{int(cls)}\n")
    with open(out_dir / "splits.tsv", "w", encoding="utf-8", newline="\n") as f:
        for ids, split in ((train_ids, "train"), (val_ids, "val"), (test_ids, "test")):
            for node in ids:
                f.write(f"{node}\t{split}\n")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--raw-dir", required=True, type=Path,
                        help="directory holding the ind.NAME.* files")
    parser.add_argument("--name", required=True, help="cora, citeseer, or pubmed")
    parser.add_argument("--out", required=True, type=Path,
                        help="bundle directory to create")
    parser.add_argument("--no-row-normalize", action="store_true",
                        help="store features without the L1 row-normalize flag")
    args = parser.parse_args(argv)

    features, labels, train_ids, val_ids, test_ids, pairs = load_planetoid(
        args.raw_dir, args.name
    )
    write_bundle_files(
        args.out, features, labels, train_ids, val_ids, test_ids, pairs,
        row_normalize=not args.no_row_normalize,
    )
    print(
        f"wrote {args.out}: {features.shape[0]} nodes, {len(pairs)} undirected "
        f"edges, {labels.max() + 1} classes, splits "
        f"{len(train_ids)}/{len(val_ids)}/{len(test_ids)}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
