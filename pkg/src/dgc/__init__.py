"""Decoupled graph convolution: heat-equation feature propagation over
sparse graphs with independent terminal time and step count, exact spectral
oracles, a linear softmax classifier, and an experiment harness."""

from ._kernels import backend as kernel_backend
from .classifier import (
    SoftmaxModel,
    TrainConfig,
    TrainReport,
    WEIGHT_DECAY_GRID,
    evaluate,
    forward,
    load_model,
    loss_and_grad,
    save_model,
    train,
    tune_weight_decay,
)
from .data import (
    LabeledDataset,
    SbmConfig,
    add_feature_noise,
    generate_sbm,
    load_bundle,
    row_normalize,
    write_bundle,
)
from .diffusion import (
    DiffusionConfig,
    euler_propagate,
    propagate,
    read_feature_cache,
    rk4_propagate,
    sgc_propagate,
    write_feature_cache,
)
from .graphcore import (
    LaplacianHandle,
    PropagationMatrix,
    SparseGraph,
    build_graph,
    laplacian,
    normalize,
    spectral_norm,
)
from .oracle import (
    DENSE_LIMIT,
    EigenDecomposition,
    eigendecompose,
    equilibrium_projection,
    euler_error_bound,
    euler_truncation_bound,
    exact_heat_kernel,
    inverse_diffusion,
)

__version__ = "0.1.0"

__all__ = [
    "DENSE_LIMIT",
    "DiffusionConfig",
    "EigenDecomposition",
    "LabeledDataset",
    "LaplacianHandle",
    "PropagationMatrix",
    "SbmConfig",
    "SoftmaxModel",
    "SparseGraph",
    "TrainConfig",
    "TrainReport",
    "WEIGHT_DECAY_GRID",
    "add_feature_noise",
    "build_graph",
    "eigendecompose",
    "equilibrium_projection",
    "euler_error_bound",
    "euler_propagate",
    "euler_truncation_bound",
    "evaluate",
    "exact_heat_kernel",
    "forward",
    "generate_sbm",
    "inverse_diffusion",
    "kernel_backend",
    "laplacian",
    "load_bundle",
    "load_model",
    "loss_and_grad",
    "normalize",
    "propagate",
    "read_feature_cache",
    "rk4_propagate",
    "row_normalize",
    "save_model",
    "sgc_propagate",
    "spectral_norm",
    "train",
    "tune_weight_decay",
    "write_bundle",
    "write_feature_cache",
]
