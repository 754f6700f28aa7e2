"""Exception types raised across the package."""


class DGCError(Exception):
    """Base class for all dgc errors."""


class GraphError(DGCError):
    """Invalid graph structure or construction input."""


class IndexOutOfRangeError(GraphError):
    """Edge endpoint outside [0, n)."""


class DuplicateEdgeError(GraphError):
    """The same undirected pair appears more than once in the edge list."""


class SelfLoopError(GraphError):
    """Self-loops are added by normalization, never ingested."""


class NonPositiveWeightError(GraphError):
    """Edge weights must be strictly positive."""


class IsolatedNodeError(GraphError):
    """The sym variant needs every node to have degree >= 1."""


class DimensionMismatchError(DGCError):
    """Operand shapes are incompatible."""


class NonFiniteError(DGCError):
    """A feature matrix contains NaN or Inf."""


class UnstableStepSizeError(DGCError):
    """Step size dt = T/K exceeds the stability limit for the sym variant."""


class ConfigError(DGCError):
    """Invalid diffusion or training configuration."""


class OracleLimitError(DGCError):
    """Problem size exceeds the dense-oracle node limit."""


class NotSymmetricError(DGCError):
    """Dense matrix handed to the spectral oracle is not symmetric."""


class OverflowRiskError(DGCError):
    """Inverse diffusion would exponentiate past the overflow guard."""


class EmptyMaskError(DGCError):
    """A node mask selects no nodes."""


class LabelOutOfRangeError(DGCError):
    """A label is outside [0, num_classes)."""


class BundleError(DGCError):
    """Malformed graph-bundle directory."""


class MissingFileError(BundleError):
    """A required bundle file is absent."""


class SchemaViolationError(BundleError):
    """Bundle file contents violate the documented schema."""


class MaskOverlapError(BundleError):
    """Train/val/test masks are not pairwise disjoint."""


class CacheFormatError(DGCError):
    """Propagated-feature cache file is malformed."""
