"""Hot CSR propagation kernels, with backend selection at import time.

The compiled Cython extension is preferred; a scipy-backed fallback is used
when the extension is missing. Set ``DGC_KERNEL=cython`` or
``DGC_KERNEL=numpy`` to force a backend (forcing an unavailable one raises).

All three kernels share the signature ``f(rows, cols, vals, x, out)`` with
CSR int64 index arrays, float64 dense ``x`` of shape (n, d), and a
preallocated float64 ``out`` of the same shape (``out`` must not alias
``x``):

* ``spmm``:            out = S @ x
* ``euler_step``:      out = (1 - dt) * x + dt * (S @ x)   (extra arg dt)
* ``laplacian_apply``: out = x - S @ x

Both backends accumulate each output row in CSR storage order, so results
are deterministic per backend and agree across backends to ~1e-15.
"""
import os

_forced = os.environ.get("DGC_KERNEL", "").strip().lower()

if _forced in ("", "cython"):
    try:
        from . import _csr_cy as _impl

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise ImportError(
                "DGC_KERNEL=cython but the compiled extension is not built; "
                "run `pip install -e .` or `python setup.py build_ext --inplace`"
            )
        from . import _csr_py as _impl

        BACKEND = "numpy"
elif _forced == "numpy":
    from . import _csr_py as _impl

    BACKEND = "numpy"
else:
    raise ImportError(f"unknown DGC_KERNEL value {_forced!r}")

spmm = _impl.spmm
euler_step = _impl.euler_step
laplacian_apply = _impl.laplacian_apply


def backend() -> str:
    """Name of the active kernel backend ("cython" or "numpy")."""
    return BACKEND
