"""Dense spectral ground truth for the sparse integrators.

Everything here works from a full eigendecomposition of a dense Laplacian,
so it is exact (up to LAPACK roundoff) and completely independent of the
CSR kernels it is used to test. Sizes are capped at ``DENSE_LIMIT``
nodes; larger problems belong to the sparse path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    NotSymmetricError,
    OracleLimitError,
    OverflowRiskError,
)

DENSE_LIMIT = 2048

# e^(t*lambda) beyond this loses too much headroom in float64
INVERSE_DIFFUSION_EXPONENT_CAP = 40.0


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and orthonormal eigenvector columns of L."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def eigendecompose(l_dense: np.ndarray, dense_limit: int = DENSE_LIMIT) -> EigenDecomposition:
    """Full symmetric eigendecomposition L = U diag(lambda) U^T.

    Raises:
        OracleLimitError: n exceeds ``dense_limit``.
        NotSymmetricError: max |L - L^T| > 1e-10.
    """
    l_dense = np.asarray(l_dense, dtype=np.float64)
    if l_dense.ndim != 2 or l_dense.shape[0] != l_dense.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {l_dense.shape}")
    n = l_dense.shape[0]
    if n > dense_limit:
        raise OracleLimitError(f"n={n} exceeds dense-oracle limit {dense_limit}")
    if n and np.max(np.abs(l_dense - l_dense.T)) > 1e-10:
        raise NotSymmetricError("matrix is not symmetric within 1e-10")
    eigenvalues, eigenvectors = np.linalg.eigh(l_dense)
    return EigenDecomposition(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def _spectral_apply(eig: EigenDecomposition, weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != eig.n:
        raise DimensionMismatchError(f"features must be ({eig.n}, d), got {x.shape}")
    u = eig.eigenvectors
    return u @ (weights[:, None] * (u.T @ x))


def exact_heat_kernel(eig: EigenDecomposition, t: float, x: np.ndarray) -> np.ndarray:
    """H_t x = U diag(e^{-lambda t}) U^T x, the exact diffusion at time t."""
    if t < 0.0:
        raise ValueError(f"diffusion time must be >= 0, got {t}")
    return _spectral_apply(eig, np.exp(-eig.eigenvalues * t), x)


def inverse_diffusion(eig: EigenDecomposition, t_star: float, x_clean: np.ndarray) -> np.ndarray:
    """Run the diffusion backwards: U diag(e^{+lambda t*}) U^T x.

    This is the corruption process mapping clean features to observed ones;
    ``exact_heat_kernel(eig, t_star, .)`` inverts it.
    """
    if t_star < 0.0:
        raise ValueError(f"corruption time must be >= 0, got {t_star}")
    lam_max = float(eig.eigenvalues[-1]) if eig.n else 0.0
    if t_star * lam_max > INVERSE_DIFFUSION_EXPONENT_CAP:
        raise OverflowRiskError(
            f"t* * lambda_max = {t_star * lam_max:.3g} exceeds the overflow "
            f"guard {INVERSE_DIFFUSION_EXPONENT_CAP}"
        )
    return _spectral_apply(eig, np.exp(eig.eigenvalues * t_star), x_clean)


def equilibrium_projection(eig: EigenDecomposition, x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Project x onto the lambda=0 eigenspace (the t -> inf limit of H_t x)."""
    weights = (eig.eigenvalues <= tol).astype(np.float64)
    return _spectral_apply(eig, weights, x)


def euler_error_bound(t: float, k: int, norm_l: float, norm_x0: float) -> float:
    """Worst-case Frobenius error of K-step forward Euler at terminal time T.

    Equals T * ||L|| * ||X0|| / (2K) * (e^{T ||L||} - 1); ||L|| is the
    spectral norm of the Laplacian, ||X0|| the Frobenius norm of the input.
    """
    if t < 0.0 or k < 1 or norm_l < 0.0 or norm_x0 < 0.0:
        raise ValueError("need T >= 0, K >= 1 and non-negative norms")
    if t == 0.0:
        return 0.0
    return t * norm_l * norm_x0 / (2.0 * k) * (math.exp(t * norm_l) - 1.0)


def euler_truncation_bound(dt: float, norm_l: float, norm_x0: float) -> float:
    """Bound on the local error of a single Euler step started on the exact
    trajectory: (dt^2 / 2) * ||L||^2 * ||X0||."""
    if dt < 0.0 or norm_l < 0.0 or norm_x0 < 0.0:
        raise ValueError("need non-negative dt and norms")
    return 0.5 * dt * dt * norm_l * norm_l * norm_x0
