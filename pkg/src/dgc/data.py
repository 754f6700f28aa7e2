"""Dataset ingestion, preprocessing, and synthetic data generation.

The on-disk dataset format is a "graph bundle" directory:

* ``meta.json``      {"num_nodes", "num_features", "num_classes",
                      "row_normalize", "features_format": "bin"|"tsv"}
* ``edges.tsv``      "src<TAB>dst[<TAB>weight]", 0-indexed, each undirected
                     pair once, no self-loops, LF endings
* ``features.bin``   n*d float32 little-endian row-major, or
  ``features.tsv``   n lines of d tab-separated decimals
* ``labels.tsv``     "node_id<TAB>class_id" for every node
* ``splits.tsv``     "node_id<TAB>train|val|test"; absent nodes belong to
                     no mask

Synthetic data comes from a seeded stochastic block model whose observed
features are produced by running the graph diffusion backwards for time
``t_star`` from clean class-separated features.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    GraphError,
    MaskOverlapError,
    MissingFileError,
    OracleLimitError,
    SchemaViolationError,
)
from .graphcore import SparseGraph, build_graph, laplacian, normalize
from .oracle import DENSE_LIMIT, eigendecompose, inverse_diffusion

SPLIT_NAMES = ("train", "val", "test")


@dataclass(frozen=True)
class LabeledDataset:
    graph: SparseGraph
    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray
    num_classes: int
    row_normalized: bool = False
    features_format: str = "bin"

    def __post_init__(self) -> None:
        n = self.graph.n
        if self.features.shape[0] != n or len(self.labels) != n:
            raise SchemaViolationError("features/labels length must equal node count")
        masks = (self.train_mask, self.val_mask, self.test_mask)
        if any(m.shape != (n,) for m in masks):
            raise SchemaViolationError("masks must be length-n boolean vectors")
        if np.any((self.train_mask & self.val_mask)
                  | (self.train_mask & self.test_mask)
                  | (self.val_mask & self.test_mask)):
            raise MaskOverlapError("train/val/test masks must be pairwise disjoint")
        evaluated = self.train_mask | self.val_mask | self.test_mask
        if evaluated.any():
            sel = self.labels[evaluated]
            if sel.min() < 0 or sel.max() >= self.num_classes:
                raise SchemaViolationError(
                    f"labels of masked nodes must lie in [0, {self.num_classes})"
                )

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


def row_normalize(x: np.ndarray) -> np.ndarray:
    """Scale each row to unit L1 norm; all-zero rows stay zero."""
    x = np.asarray(x, dtype=np.float64)
    norms = np.abs(x).sum(axis=1, keepdims=True)
    out = x.copy()
    nz = norms[:, 0] > 0.0
    out[nz] /= norms[nz]
    return out


def add_feature_noise(x: np.ndarray, sigma: float, seed: int) -> np.ndarray:
    """x + sigma * G with G i.i.d. standard normal from the given seed."""
    if sigma < 0.0:
        raise ValueError("sigma must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    if sigma == 0.0:
        return x.copy()
    rng = np.random.default_rng(seed)
    return x + sigma * rng.standard_normal(x.shape)


def _read_tsv(path: Path, name: str) -> list[list[str]]:
    if not path.is_file():
        raise MissingFileError(f"bundle is missing {name}")
    out = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            out.append(line.split("\t"))
    return out


def load_bundle(path) -> LabeledDataset:
    """Load and validate a graph-bundle directory.

    Features are promoted to float64 and, if the meta flag says so,
    L1 row-normalized.
    """
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.is_file():
        raise MissingFileError("bundle is missing meta.json")
    with open(meta_path, "r", encoding="utf-8") as f:
        meta = json.load(f)
    try:
        n = int(meta["num_nodes"])
        d = int(meta["num_features"])
        c = int(meta["num_classes"])
        do_normalize = bool(meta["row_normalize"])
        fmt = str(meta["features_format"])
    except KeyError as exc:
        raise SchemaViolationError(f"meta.json missing key {exc}") from exc
    if fmt not in ("bin", "tsv"):
        raise SchemaViolationError(f"unknown features_format {fmt!r}")

    edges = []
    for fields in _read_tsv(root / "edges.tsv", "edges.tsv"):
        if len(fields) not in (2, 3):
            raise SchemaViolationError(f"bad edge line {fields!r}")
        src, dst = int(fields[0]), int(fields[1])
        w = float(fields[2]) if len(fields) == 3 else 1.0
        edges.append((src, dst, w))
    try:
        graph = build_graph(edges, n)
    except GraphError as exc:
        raise SchemaViolationError(f"bad edge list: {exc}") from exc

    if fmt == "bin":
        fpath = root / "features.bin"
        if not fpath.is_file():
            raise MissingFileError("bundle is missing features.bin")
        raw = np.fromfile(fpath, dtype="<f4")
        if raw.size != n * d:
            raise SchemaViolationError(
                f"features.bin holds {raw.size} values, expected {n * d}"
            )
        features = raw.astype(np.float64).reshape(n, d)
    else:
        lines = _read_tsv(root / "features.tsv", "features.tsv")
        if len(lines) != n:
            raise SchemaViolationError(f"features.tsv has {len(lines)} rows, expected {n}")
        features = np.empty((n, d))
        for i, fields in enumerate(lines):
            if len(fields) != d:
                raise SchemaViolationError(f"features.tsv row {i} has {len(fields)} values")
            features[i] = [float(v) for v in fields]

    labels = np.full(n, -1, dtype=np.int64)
    seen_label = np.zeros(n, dtype=bool)
    for fields in _read_tsv(root / "labels.tsv", "labels.tsv"):
        if len(fields) != 2:
            raise SchemaViolationError(f"bad label line {fields!r}")
        node, cls = int(fields[0]), int(fields[1])
        if not 0 <= node < n:
            raise SchemaViolationError(f"label node id {node} out of range")
        if seen_label[node]:
            raise SchemaViolationError(f"node {node} labeled twice")
        if not 0 <= cls < c:
            raise SchemaViolationError(f"class id {cls} outside [0, {c})")
        labels[node] = cls
        seen_label[node] = True
    if not seen_label.all():
        missing = int(np.flatnonzero(~seen_label)[0])
        raise SchemaViolationError(f"node {missing} has no label")

    masks = {name: np.zeros(n, dtype=bool) for name in SPLIT_NAMES}
    assigned = np.zeros(n, dtype=bool)
    for fields in _read_tsv(root / "splits.tsv", "splits.tsv"):
        if len(fields) != 2:
            raise SchemaViolationError(f"bad split line {fields!r}")
        node, split = int(fields[0]), fields[1]
        if not 0 <= node < n:
            raise SchemaViolationError(f"split node id {node} out of range")
        if split not in masks:
            raise SchemaViolationError(f"unknown split name {split!r}")
        if assigned[node]:
            raise MaskOverlapError(f"node {node} assigned to more than one split")
        masks[split][node] = True
        assigned[node] = True

    if do_normalize:
        features = row_normalize(features)
    return LabeledDataset(
        graph=graph,
        features=features,
        labels=labels,
        train_mask=masks["train"],
        val_mask=masks["val"],
        test_mask=masks["test"],
        num_classes=c,
        row_normalized=do_normalize,
        features_format=fmt,
    )


def _format_weight(w: float) -> str:
    return repr(w)


def write_bundle(dataset: LabeledDataset, path) -> None:
    """Write a dataset back out as a canonical bundle directory.

    Canonical form: edges sorted by (min, max) endpoint with the weight
    column omitted when it is exactly 1.0; labels and splits sorted by node
    id; LF line endings. Loading a canonical bundle with
    ``row_normalize=false`` and writing it again is byte-identical.
    """
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    meta = {
        "num_nodes": dataset.n,
        "num_features": dataset.num_features,
        "num_classes": dataset.num_classes,
        "row_normalize": dataset.row_normalized,
        "features_format": dataset.features_format,
    }
    with open(root / "meta.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")

    g = dataset.graph
    pairs = []
    for i in range(g.n):
        lo, hi = g.rows[i], g.rows[i + 1]
        for c, w in zip(g.cols[lo:hi], g.vals[lo:hi]):
            if i < c:
                pairs.append((i, int(c), float(w)))
    with open(root / "edges.tsv", "w", encoding="utf-8", newline="\n") as f:
        for src, dst, w in sorted(pairs):
            if w == 1.0:
                f.write(f"{src}\t{dst}\n")
            else:
                f.write(f"{src}\t{dst}\t{_format_weight(w)}\n")

    if dataset.features_format == "bin":
        dataset.features.astype("<f4").tofile(root / "features.bin")
    else:
        with open(root / "features.tsv", "w", encoding="utf-8", newline="\n") as f:
            for row in dataset.features:
                f.write("\t".join(repr(float(v)) for v in row))
                f.write("\n")

    with open(root / "labels.tsv", "w", encoding="utf-8", newline="\n") as f:
        for node, cls in enumerate(dataset.labels):
            f.write(f"{node}\t{int(cls)}\n")

    with open(root / "splits.tsv", "w", encoding="utf-8", newline="\n") as f:
        for node in range(dataset.n):
            for name, mask in (
                ("train", dataset.train_mask),
                ("val", dataset.val_mask),
                ("test", dataset.test_mask),
            ):
                if mask[node]:
                    f.write(f"{node}\t{name}\n")


@dataclass(frozen=True)
class SbmConfig:
    """Seeded stochastic block model with inverse-diffusion corruption."""

    blocks: int = 3
    nodes_per_block: int = 60
    p_in: float = 0.2
    p_out: float = 0.02
    feature_dim: int = 16
    class_sep: float = 1.0
    noise_sigma: float = 0.1
    t_star: float = 2.0
    seed: int = 7

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_out <= self.p_in <= 1.0:
            raise ValueError("need 0 <= p_out <= p_in <= 1")
        if self.t_star < 0.0:
            raise ValueError("t_star must be >= 0")
        if self.blocks < 1 or self.nodes_per_block < 1 or self.feature_dim < 1:
            raise ValueError("blocks, nodes_per_block, feature_dim must be >= 1")

    @property
    def n(self) -> int:
        return self.blocks * self.nodes_per_block


def generate_sbm(cfg: SbmConfig) -> tuple[LabeledDataset, np.ndarray]:
    """Sample a labeled SBM dataset plus the uncorrupted features.

    Draw order is fixed (block means, edges, feature noise, split shuffle)
    so the same seed always reproduces the same dataset bit for bit.
    Observed features are ``inverse_diffusion(clean, t_star)`` using the
    dense oracle on the aug Laplacian, which caps n at the oracle limit
    whenever t_star > 0.
    """
    n = cfg.n
    if cfg.t_star > 0.0 and n > DENSE_LIMIT:
        raise OracleLimitError(
            f"n={n} exceeds the dense-oracle limit {DENSE_LIMIT} needed for corruption"
        )
    rng = np.random.default_rng(cfg.seed)
    labels = np.repeat(np.arange(cfg.blocks, dtype=np.int64), cfg.nodes_per_block)

    means = cfg.class_sep * rng.standard_normal((cfg.blocks, cfg.feature_dim))

    draws = rng.random((n, n))
    prob = np.where(labels[:, None] == labels[None, :], cfg.p_in, cfg.p_out)
    upper = np.triu(draws < prob, k=1)
    src, dst = np.nonzero(upper)
    graph = build_graph([(int(a), int(b), 1.0) for a, b in zip(src, dst)], n)

    clean = means[labels] + cfg.noise_sigma * rng.standard_normal((n, cfg.feature_dim))

    if cfg.t_star > 0.0:
        eig = eigendecompose(laplacian(normalize(graph, "aug")).to_dense())
        observed = inverse_diffusion(eig, cfg.t_star, clean)
    else:
        observed = clean.copy()

    perm = rng.permutation(n)
    n_train = int(0.6 * n)
    n_val = int(0.2 * n)
    train_mask = np.zeros(n, dtype=bool)
    val_mask = np.zeros(n, dtype=bool)
    test_mask = np.zeros(n, dtype=bool)
    train_mask[perm[:n_train]] = True
    val_mask[perm[n_train : n_train + n_val]] = True
    test_mask[perm[n_train + n_val :]] = True

    dataset = LabeledDataset(
        graph=graph,
        features=observed,
        labels=labels,
        train_mask=train_mask,
        val_mask=val_mask,
        test_mask=test_mask,
        num_classes=cfg.blocks,
    )
    return dataset, clean
