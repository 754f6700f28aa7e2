"""Graph representation, adjacency normalization, and spectral-norm estimation.

A graph is stored once, as a CSR-form symmetric weighted adjacency
(:class:`SparseGraph`). Normalizing it yields a :class:`PropagationMatrix`
S, either

* ``aug``: S = D~^{-1/2} (A + I) D~^{-1/2}, self-loops included, or
* ``sym``: S_sym = D^{-1/2} A D^{-1/2}, no self-loops.

The Laplacian L = I - S is never materialized; :class:`LaplacianHandle`
applies it as ``x - S @ x``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as kernels
from .errors import (
    DuplicateEdgeError,
    GraphError,
    IndexOutOfRangeError,
    IsolatedNodeError,
    NonPositiveWeightError,
    SelfLoopError,
)

VARIANTS = ("aug", "sym")

Edge = tuple[int, int, float]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class SparseGraph:
    """Symmetric weighted adjacency in CSR form.

    ``rows`` has length n+1 and is non-decreasing; ``cols``/``vals`` hold the
    column index and weight of every stored entry. Entry (i, j) is present
    iff (j, i) is, with the same weight. Immutable after construction.
    """

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def __post_init__(self) -> None:
        if self.n < 0:
            raise GraphError(f"negative node count {self.n}")
        if self.rows.shape != (self.n + 1,):
            raise GraphError("row-pointer array must have length n+1")
        if self.rows[0] != 0 or self.rows[-1] != len(self.cols) or len(self.cols) != len(self.vals):
            raise GraphError("row pointers inconsistent with entry arrays")
        if np.any(np.diff(self.rows) < 0):
            raise GraphError("row pointers must be non-decreasing")
        if len(self.cols) and (self.cols.min() < 0 or self.cols.max() >= self.n):
            raise GraphError("column index outside [0, n)")
        for a in (self.rows, self.cols, self.vals):
            _freeze(a)

    @property
    def nnz(self) -> int:
        return len(self.vals)

    def degrees(self) -> np.ndarray:
        """Weighted degree d_i = sum_j a_ij."""
        d = np.zeros(self.n)
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.rows))
        np.add.at(d, src, self.vals)
        return d

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo, hi = self.rows[i], self.rows[i + 1]
            out[i, self.cols[lo:hi]] = self.vals[lo:hi]
        return out


def build_graph(edges: Sequence[Edge | tuple[int, int]], n: int) -> SparseGraph:
    """Assemble a SparseGraph from an undirected edge list.

    Each undirected pair is given once and is symmetrized here; listing a
    pair twice (in either orientation) is an error. Weights default to 1.0.

    Raises:
        IndexOutOfRangeError: endpoint outside [0, n).
        SelfLoopError: src == dst (self-loops come from normalization).
        NonPositiveWeightError: weight <= 0.
        DuplicateEdgeError: repeated undirected pair.
    """
    seen: set[tuple[int, int]] = set()
    src_list: list[int] = []
    dst_list: list[int] = []
    w_list: list[float] = []
    for edge in edges:
        if len(edge) == 2:
            src, dst = edge  # type: ignore[misc]
            w = 1.0
        else:
            src, dst, w = edge  # type: ignore[misc]
        if not (0 <= src < n and 0 <= dst < n):
            raise IndexOutOfRangeError(f"edge ({src}, {dst}) outside [0, {n})")
        if src == dst:
            raise SelfLoopError(f"self-loop at node {src}")
        w = float(w)
        if not w > 0.0:
            raise NonPositiveWeightError(f"edge ({src}, {dst}) has weight {w}")
        key = (src, dst) if src < dst else (dst, src)
        if key in seen:
            raise DuplicateEdgeError(f"undirected pair {key} listed more than once")
        seen.add(key)
        src_list.extend((src, dst))
        dst_list.extend((dst, src))
        w_list.extend((w, w))

    src_arr = np.asarray(src_list, dtype=np.int64)
    dst_arr = np.asarray(dst_list, dtype=np.int64)
    w_arr = np.asarray(w_list, dtype=np.float64)
    order = np.lexsort((dst_arr, src_arr))
    src_arr, dst_arr, w_arr = src_arr[order], dst_arr[order], w_arr[order]
    rows = np.zeros(n + 1, dtype=np.int64)
    np.add.at(rows, src_arr + 1, 1)
    rows = np.cumsum(rows)
    return SparseGraph(n=n, rows=rows, cols=dst_arr, vals=w_arr)


@dataclass(frozen=True)
class PropagationMatrix:
    """Normalized propagation operator S, stored as a CSR SparseGraph.

    ``kind`` is "aug" (self-loop augmented, eigenvalues in (-1, 1]) or
    "sym" (plain symmetric normalization, eigenvalues in [-1, 1]).
    """

    kind: str
    matrix: SparseGraph
    self_loop_included: bool

    @property
    def n(self) -> int:
        return self.matrix.n

    def apply(self, x: np.ndarray) -> np.ndarray:
        """S @ x for a dense (n, d) matrix x."""
        x = np.ascontiguousarray(x, dtype=np.float64)
        g = self.matrix
        out = np.empty_like(x)
        kernels.spmm(g.rows, g.cols, g.vals, x, out)
        return out

    def to_dense(self) -> np.ndarray:
        return self.matrix.to_dense()


def normalize(g: SparseGraph, variant: str = "aug") -> PropagationMatrix:
    """Build S = D^{-1/2} A D^{-1/2}, with A augmented by I for ``aug``.

    Entry (i, j) becomes w_ij / sqrt(d_i * d_j) with d the (augmented)
    degrees, which is exactly symmetric because the degree product is
    invariant under swapping i and j.

    Raises:
        IsolatedNodeError: variant="sym" and some node has degree 0.
    """
    if variant not in VARIANTS:
        raise GraphError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    deg = g.degrees()
    if variant == "aug":
        deg = deg + 1.0  # self-loop weight fixed at 1.0
    elif np.any(deg <= 0.0):
        bad = int(np.flatnonzero(deg <= 0.0)[0])
        raise IsolatedNodeError(
            f"node {bad} is isolated; sym normalization needs degree >= 1"
        )

    src = np.repeat(np.arange(g.n, dtype=np.int64), np.diff(g.rows))
    if variant == "sym":
        vals = g.vals / np.sqrt(deg[src] * deg[g.cols])
        s = SparseGraph(n=g.n, rows=g.rows.copy(), cols=g.cols.copy(), vals=vals)
        return PropagationMatrix(kind="sym", matrix=s, self_loop_included=False)

    # aug: splice a diagonal self-loop entry into each row, re-sorted so
    # repeated builds are identical.
    diag = np.arange(g.n, dtype=np.int64)
    all_src = np.concatenate([src, diag])
    all_cols = np.concatenate([g.cols, diag])
    all_w = np.concatenate([g.vals, np.ones(g.n)])
    all_vals = all_w / np.sqrt(deg[all_src] * deg[all_cols])
    order = np.lexsort((all_cols, all_src))
    rows = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(all_src, minlength=g.n), out=rows[1:])
    s = SparseGraph(n=g.n, rows=rows, cols=all_cols[order], vals=all_vals[order])
    return PropagationMatrix(kind="aug", matrix=s, self_loop_included=True)


@dataclass(frozen=True)
class LaplacianHandle:
    """L = I - S, applied matrix-free as ``x - S @ x``."""

    propagation: PropagationMatrix

    @property
    def n(self) -> int:
        return self.propagation.n

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        g = self.propagation.matrix
        out = np.empty_like(x)
        kernels.laplacian_apply(g.rows, g.cols, g.vals, x, out)
        return out

    def to_dense(self) -> np.ndarray:
        return np.eye(self.n) - self.propagation.to_dense()


def laplacian(prop: PropagationMatrix) -> LaplacianHandle:
    return LaplacianHandle(propagation=prop)


class SpectralNormEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


def spectral_norm(
    l: LaplacianHandle, tol: float = 1e-10, max_iter: int = 10_000
) -> SpectralNormEstimate:
    """Largest eigenvalue of L by power iteration with Rayleigh quotients.

    L is symmetric PSD, so the spectral norm equals the largest eigenvalue.
    The start vector comes from a fixed-seed generator, making the estimate
    deterministic. Non-convergence within ``max_iter`` is flagged in the
    result, not raised.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    n = l.n
    if n == 0:
        return SpectralNormEstimate(0.0, True, 0)
    rng = np.random.default_rng(0x5EED)
    v = rng.standard_normal((n, 1))
    v /= np.linalg.norm(v)
    prev = np.inf
    for it in range(1, max_iter + 1):
        w = l.apply(v)
        nw = float(np.linalg.norm(w))
        if nw <= 1e-300:
            # L annihilates a generic vector: spectrum is (numerically) zero.
            return SpectralNormEstimate(0.0, True, it)
        est = float(np.vdot(v, w))
        v = w / nw
        if abs(est - prev) <= tol * max(abs(est), 1e-300):
            return SpectralNormEstimate(est, True, it)
        prev = est
    return SpectralNormEstimate(prev, False, max_iter)
