"""Feature propagation: repeated-S, forward-Euler, and RK4 integrators.

All schemes numerically integrate the graph heat equation
``dX/dt = -L X`` with ``L = I - S`` over a fixed step count:

* ``sgc``:   X <- S X repeated K times (step size locked to 1, T = K),
* ``euler``: X <- (1 - dt) X + dt (S X), dt = T/K,
* ``rk4``:   classic 4-stage Runge-Kutta on -L X, dt = T/K.

Terminal time T and step count K are independent knobs for euler/rk4;
that decoupling is the whole point. Operations are pure: inputs are
read-only and outputs freshly allocated, in float64 throughout.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
import numpy as np

from . import _kernels as kernels
from .errors import (
    CacheFormatError,
    ConfigError,
    DimensionMismatchError,
    NonFiniteError,
    UnstableStepSizeError,
)
from .graphcore import PropagationMatrix, VARIANTS

SCHEMES = ("sgc", "euler", "rk4")

_SCHEME_CODE = {name: i for i, name in enumerate(SCHEMES)}
_VARIANT_CODE = {name: i for i, name in enumerate(VARIANTS)}

CACHE_MAGIC = b"DGCF"
CACHE_VERSION = 1


@dataclass(frozen=True)
class DiffusionConfig:
    """Propagation scheme, Laplacian variant, terminal time T, step count K.

    ``sgc`` couples T = K (unit step size). ``euler``/``rk4`` accept any
    T >= 0 with K >= 1 (K = 0 only together with T = 0); the sym variant
    additionally needs T/K <= 1 to keep the Euler step operator a
    contraction.
    """

    scheme: str
    variant: str = "aug"
    t: float = 0.0
    k: int = 0

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        t = float(self.t)
        if not np.isfinite(t) or t < 0.0:
            raise ConfigError(f"terminal time must be finite and >= 0, got {t}")
        if self.k < 0:
            raise ConfigError(f"step count must be >= 0, got {self.k}")
        if self.scheme == "sgc":
            if t == 0.0:
                t = float(self.k)  # T is not a free knob for sgc
            elif t != float(self.k):
                raise ConfigError(
                    f"sgc couples T = K (unit steps); got T={t}, K={self.k}"
                )
        else:
            if self.k == 0 and t > 0.0:
                raise ConfigError("K=0 with T>0 is rejected rather than interpreted")
            if self.variant == "sym" and self.k >= 1 and t / self.k > 1.0:
                raise UnstableStepSizeError(
                    f"dt = {t / self.k:.4g} > 1 is unstable for the sym variant"
                )
        object.__setattr__(self, "t", t)

    @property
    def dt(self) -> float:
        return self.t / self.k if self.k else 0.0

    def describe(self) -> str:
        return f"{self.scheme}/{self.variant} T={self.t:g} K={self.k}"


def _checked(x: np.ndarray, s: PropagationMatrix) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != s.n:
        raise DimensionMismatchError(
            f"features must be ({s.n}, d) 2-D, got shape {x.shape}"
        )
    if not np.isfinite(x).all():
        raise NonFiniteError("input features contain NaN or Inf")
    return x


def _finite(out: np.ndarray) -> np.ndarray:
    if not np.isfinite(out).all():
        raise NonFiniteError("propagation produced NaN or Inf")
    return out


def sgc_propagate(x: np.ndarray, s: PropagationMatrix, k: int) -> np.ndarray:
    """K repeated applications of S; k=0 returns a copy."""
    x = _checked(x, s)
    if k < 0:
        raise ConfigError(f"step count must be >= 0, got {k}")
    g = s.matrix
    cur, nxt = x.copy(), np.empty_like(x)
    for _ in range(k):
        kernels.spmm(g.rows, g.cols, g.vals, cur, nxt)
        cur, nxt = nxt, cur
    return _finite(cur)


def euler_propagate(x: np.ndarray, s: PropagationMatrix, t: float, k: int) -> np.ndarray:
    """Forward Euler: K steps of X <- (1 - dt) X + dt (S X) with dt = T/K."""
    x = _checked(x, s)
    t = float(t)
    if t < 0.0 or not np.isfinite(t):
        raise ConfigError(f"terminal time must be finite and >= 0, got {t}")
    if t == 0.0:
        return x.copy()
    if k < 1:
        raise ConfigError("K >= 1 required when T > 0")
    dt = t / k
    if s.kind == "sym" and dt > 1.0:
        raise UnstableStepSizeError(
            f"dt = {dt:.4g} > 1 is unstable for the sym variant"
        )
    g = s.matrix
    cur, nxt = x.copy(), np.empty_like(x)
    for _ in range(k):
        kernels.euler_step(g.rows, g.cols, g.vals, cur, dt, nxt)
        cur, nxt = nxt, cur
    return _finite(cur)


def rk4_propagate(x: np.ndarray, s: PropagationMatrix, t: float, k: int) -> np.ndarray:
    """Classic 4th-order Runge-Kutta on dX/dt = -L X.

    Per step, with stages R1 = X, R2 = X - (dt/2) L R1, R3 = X - (dt/2) L R2,
    R4 = X - dt L R3, the update is X <- X - (dt/6) L (R1 + 2 R2 + 2 R3 + R4).
    """
    x = _checked(x, s)
    t = float(t)
    if t < 0.0 or not np.isfinite(t):
        raise ConfigError(f"terminal time must be finite and >= 0, got {t}")
    if t == 0.0:
        return x.copy()
    if k < 1:
        raise ConfigError("K >= 1 required when T > 0")
    dt = t / k
    if s.kind == "sym" and dt > 1.0:
        raise UnstableStepSizeError(
            f"dt = {dt:.4g} > 1 is unstable for the sym variant"
        )
    g = s.matrix
    cur = x.copy()
    lr = np.empty_like(x)  # L applied to the current stage
    stage = np.empty_like(x)
    acc = np.empty_like(x)  # running R1 + 2 R2 + 2 R3 + R4 image under L
    for _ in range(k):
        kernels.laplacian_apply(g.rows, g.cols, g.vals, cur, lr)  # L R1
        np.copyto(acc, lr)
        np.multiply(lr, -0.5 * dt, out=stage)
        stage += cur  # R2
        kernels.laplacian_apply(g.rows, g.cols, g.vals, stage, lr)  # L R2
        acc += 2.0 * lr
        np.multiply(lr, -0.5 * dt, out=stage)
        stage += cur  # R3
        kernels.laplacian_apply(g.rows, g.cols, g.vals, stage, lr)  # L R3
        acc += 2.0 * lr
        np.multiply(lr, -dt, out=stage)
        stage += cur  # R4
        kernels.laplacian_apply(g.rows, g.cols, g.vals, stage, lr)  # L R4
        acc += lr
        acc *= dt / 6.0
        cur -= acc
    return _finite(cur)


def propagate(x: np.ndarray, s: PropagationMatrix, cfg: DiffusionConfig) -> np.ndarray:
    """Single entry point dispatching on cfg.scheme."""
    if s.kind != cfg.variant:
        raise ConfigError(
            f"propagation matrix is {s.kind!r} but config says {cfg.variant!r}"
        )
    if cfg.scheme == "sgc":
        return sgc_propagate(x, s, cfg.k)
    if cfg.scheme == "euler":
        return euler_propagate(x, s, cfg.t, cfg.k)
    return rk4_propagate(x, s, cfg.t, cfg.k)


# -- propagated-feature cache --------------------------------------------
#
# Layout (all little-endian):
#   "DGCF" | version u32 | n u64 | d u64 |
#   scheme u8 | variant u8 | T f64 | K u64 |
#   n*d f64 row-major feature values

_HEADER = struct.Struct("<4sIQQBBdQ")


def write_feature_cache(path, x: np.ndarray, cfg: DiffusionConfig) -> None:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionMismatchError("cache expects a 2-D feature matrix")
    with open(path, "wb") as f:
        f.write(
            _HEADER.pack(
                CACHE_MAGIC,
                CACHE_VERSION,
                x.shape[0],
                x.shape[1],
                _SCHEME_CODE[cfg.scheme],
                _VARIANT_CODE[cfg.variant],
                cfg.t,
                cfg.k,
            )
        )
        x.astype("<f8", copy=False).tofile(f)


def read_feature_cache(path) -> tuple[np.ndarray, DiffusionConfig]:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise CacheFormatError("truncated cache header")
        magic, version, n, d, scheme_b, variant_b, t, k = _HEADER.unpack(header)
        if magic != CACHE_MAGIC:
            raise CacheFormatError(f"bad magic {magic!r}")
        if version != CACHE_VERSION:
            raise CacheFormatError(f"unsupported cache version {version}")
        try:
            cfg = DiffusionConfig(
                scheme=SCHEMES[scheme_b], variant=VARIANTS[variant_b], t=t, k=int(k)
            )
        except IndexError as exc:
            raise CacheFormatError("bad scheme/variant byte") from exc
        data = np.fromfile(f, dtype="<f8", count=n * d)
    if data.size != n * d:
        raise CacheFormatError("truncated cache payload")
    return data.reshape(n, d), cfg
