"""scipy-backed fallback kernels, import-compatible with the Cython core."""
import numpy as np
import scipy.sparse as sp


def _csr(rows, cols, vals, n):
    m = sp.csr_matrix((vals, cols, rows), shape=(n, n), copy=False)
    m.has_canonical_format = True  # rows are sorted and duplicate-free
    return m


def spmm(rows, cols, vals, x, out):
    n = x.shape[0]
    out[:] = _csr(rows, cols, vals, n) @ x


def euler_step(rows, cols, vals, x, dt, out):
    n = x.shape[0]
    np.multiply(_csr(rows, cols, vals, n) @ x, dt, out=out)
    out += (1.0 - dt) * x


def laplacian_apply(rows, cols, vals, x, out):
    n = x.shape[0]
    np.subtract(x, _csr(rows, cols, vals, n) @ x, out=out)
