"""Multinomial logistic regression on propagated features.

Full-batch training with Adam (default) or plain gradient descent. The
objective is convex, so parameters start at zero and every run with the
same inputs is bit-identical; no random initialization, no dropout.
"""
from __future__ import annotations

import json
import struct
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import (
    CacheFormatError,
    ConfigError,
    DimensionMismatchError,
    EmptyMaskError,
    LabelOutOfRangeError,
)

WEIGHT_DECAY_GRID = (1e-6, 5e-6, 1e-5, 5e-5, 1e-4, 5e-4)

CHECKPOINT_MAGIC = b"DGCM"
CHECKPOINT_VERSION = 1


@dataclass
class SoftmaxModel:
    theta: np.ndarray  # (d, C)
    bias: np.ndarray  # (C,)

    @property
    def d(self) -> int:
        return self.theta.shape[0]

    @property
    def num_classes(self) -> int:
        return self.theta.shape[1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.2
    epochs: int = 100
    weight_decay: float = 0.0
    optimizer: str = "adam"
    seed: int = 0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    use_bias: bool = True

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ConfigError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.weight_decay < 0.0:
            raise ConfigError("weight_decay must be >= 0")
        if self.optimizer not in ("adam", "gd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")


@dataclass
class TrainReport:
    train_loss: list[float]
    val_acc: list[float]
    final_test_acc: float
    preprocess_ms: float
    train_ms: float
    config: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "train_loss": self.train_loss,
            "val_acc": self.val_acc,
            "preprocess_ms": self.preprocess_ms,
            "train_ms": self.train_ms,
            "final_test_acc": self.final_test_acc,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    np.exp(shifted, out=shifted)
    shifted /= shifted.sum(axis=1, keepdims=True)
    return shifted


def forward(model: SoftmaxModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities, one row per node; rows sum to 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.d:
        raise DimensionMismatchError(
            f"features must be (n, {model.d}), got {x.shape}"
        )
    return _softmax(x @ model.theta + model.bias)


def _check_labels(labels: np.ndarray, mask: np.ndarray, num_classes: int) -> np.ndarray:
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise EmptyMaskError("mask selects no nodes")
    sel = labels[idx]
    if sel.min() < 0 or sel.max() >= num_classes:
        raise LabelOutOfRangeError(
            f"labels must lie in [0, {num_classes}) on masked nodes"
        )
    return idx


def loss_and_grad(
    model: SoftmaxModel,
    x: np.ndarray,
    labels: np.ndarray,
    mask: np.ndarray,
    weight_decay: float = 0.0,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Masked-mean cross-entropy plus (wd/2)||theta||_F^2 (bias undecayed),
    with its exact analytic gradients."""
    idx = _check_labels(labels, mask, model.num_classes)
    xm = x[idx]
    ym = labels[idx]
    m = idx.size
    logits = xm @ model.theta + model.bias
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1))
    nll = float(np.mean(logsumexp - shifted[np.arange(m), ym]))
    loss = nll + 0.5 * weight_decay * float(np.sum(model.theta * model.theta))

    dz = _softmax(logits)
    dz[np.arange(m), ym] -= 1.0
    dz /= m
    grad_theta = xm.T @ dz + weight_decay * model.theta
    grad_bias = dz.sum(axis=0)
    return loss, grad_theta, grad_bias


def evaluate(model: SoftmaxModel, x: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    """Fraction of masked nodes whose argmax class matches the label.

    np.argmax breaks ties toward the lowest class index.
    """
    idx = _check_labels(labels, mask, model.num_classes)
    pred = np.argmax(forward(model, x[idx]), axis=1)
    return float(np.mean(pred == labels[idx]))


def train(
    x: np.ndarray,
    dataset,
    cfg: TrainConfig,
    preprocess_ms: float = 0.0,
) -> tuple[SoftmaxModel, TrainReport]:
    """Full-batch training on ``dataset.train_mask``, starting from zeros.

    Per epoch: record the pre-step training loss, take one optimizer step
    on the whole masked batch, then record validation accuracy. Returns the
    final model and a report with the traces, test accuracy and timings.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[0] != dataset.n:
        raise DimensionMismatchError(
            f"features have {x.shape[0]} rows for a {dataset.n}-node dataset"
        )
    c = dataset.num_classes
    d = x.shape[1]
    model = SoftmaxModel(theta=np.zeros((d, c)), bias=np.zeros(c))

    m_theta = np.zeros_like(model.theta)
    v_theta = np.zeros_like(model.theta)
    m_bias = np.zeros_like(model.bias)
    v_bias = np.zeros_like(model.bias)
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.learning_rate

    losses: list[float] = []
    val_accs: list[float] = []
    start = time.perf_counter()
    for step in range(1, cfg.epochs + 1):
        loss, g_theta, g_bias = loss_and_grad(
            model, x, dataset.labels, dataset.train_mask, cfg.weight_decay
        )
        if not cfg.use_bias:
            g_bias[:] = 0.0
        if cfg.optimizer == "adam":
            m_theta = b1 * m_theta + (1.0 - b1) * g_theta
            v_theta = b2 * v_theta + (1.0 - b2) * g_theta * g_theta
            m_bias = b1 * m_bias + (1.0 - b1) * g_bias
            v_bias = b2 * v_bias + (1.0 - b2) * g_bias * g_bias
            corr1 = 1.0 - b1**step
            corr2 = 1.0 - b2**step
            model.theta -= lr * (m_theta / corr1) / (np.sqrt(v_theta / corr2) + eps)
            if cfg.use_bias:
                model.bias -= lr * (m_bias / corr1) / (np.sqrt(v_bias / corr2) + eps)
        else:
            model.theta -= lr * g_theta
            if cfg.use_bias:
                model.bias -= lr * g_bias
        losses.append(loss)
        val_accs.append(evaluate(model, x, dataset.labels, dataset.val_mask))
    train_ms = (time.perf_counter() - start) * 1000.0

    report = TrainReport(
        train_loss=losses,
        val_acc=val_accs,
        final_test_acc=evaluate(model, x, dataset.labels, dataset.test_mask),
        preprocess_ms=preprocess_ms,
        train_ms=train_ms,
        config=asdict(cfg),
    )
    return model, report


def tune_weight_decay(
    x: np.ndarray,
    dataset,
    cfg: TrainConfig,
    grid=WEIGHT_DECAY_GRID,
) -> tuple[float, list[tuple[float, float]]]:
    """Pick the weight decay with the best validation accuracy over a small
    deterministic grid (first value wins ties). Returns (best, table)."""
    table: list[tuple[float, float]] = []
    best_wd, best_acc = None, -1.0
    for wd in grid:
        trial = TrainConfig(**{**asdict(cfg), "weight_decay": float(wd)})
        _, report = train(x, dataset, trial)
        acc = report.val_acc[-1]
        table.append((float(wd), acc))
        if acc > best_acc:
            best_wd, best_acc = float(wd), acc
    return best_wd, table


def save_model(path, model: SoftmaxModel) -> None:
    header = struct.Struct("<4sIQQ")
    with open(path, "wb") as f:
        f.write(
            header.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, model.d, model.num_classes)
        )
        f.write(np.ascontiguousarray(model.theta, dtype="<f8").tobytes())
        f.write(np.ascontiguousarray(model.bias, dtype="<f8").tobytes())


def load_model(path) -> SoftmaxModel:
    header = struct.Struct("<4sIQQ")
    with open(path, "rb") as f:
        raw = f.read(header.size)
        if len(raw) != header.size:
            raise CacheFormatError("truncated checkpoint header")
        magic, version, d, c = header.unpack(raw)
        if magic != CHECKPOINT_MAGIC:
            raise CacheFormatError(f"bad magic {magic!r}")
        if version != CHECKPOINT_VERSION:
            raise CacheFormatError(f"unsupported checkpoint version {version}")
        theta = np.fromfile(f, dtype="<f8", count=d * c)
        bias = np.fromfile(f, dtype="<f8", count=c)
    if theta.size != d * c or bias.size != c:
        raise CacheFormatError("truncated checkpoint payload")
    return SoftmaxModel(theta=theta.reshape(d, c), bias=bias)
