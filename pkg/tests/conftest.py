import os
from pathlib import Path

import numpy as np
import pytest

from dgc.data import load_bundle
from dgc.graphcore import SparseGraph, build_graph

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = Path(__file__).resolve().parent / "fixtures"


def er_graph(rng: np.random.Generator, n: int, p: float = 0.3) -> SparseGraph:
    draws = rng.random((n, n))
    src, dst = np.nonzero(np.triu(draws < p, k=1))
    return build_graph([(int(a), int(b), 1.0) for a, b in zip(src, dst)], n)


@pytest.fixture
def two_node():
    return build_graph([(0, 1, 1.0)], 2)


@pytest.fixture
def path3():
    return build_graph([(0, 1, 1.0), (1, 2, 1.0)], 3)


def data_root() -> Path:
    return Path(os.environ.get("DGC_DATA_DIR", REPO_ROOT / "data"))


def require_bundle(name: str):
    """Load a citation bundle or skip with instructions to build it."""
    path = data_root() / name
    if not (path / "meta.json").is_file():
        pytest.skip(
            f"{name} bundle not found at {path}; download the standard raw "
            f"files and convert them with tools/convert_planetoid.py "
            f"(see README), or point DGC_DATA_DIR at your bundles"
        )
    return load_bundle(path)
