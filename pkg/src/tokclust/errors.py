"""Exception types raised by the token clustering library."""


class ZeroNormVector(ValueError):
    """A feature vector has (near-)zero Euclidean norm, so cosine distance is undefined."""


class OverlappingClusters(ValueError):
    """Two cluster member sets intersect where disjoint sets are required."""


class InvalidStop(ValueError):
    """A stopping rule is out of range for the input (e.g. k > n or k < 1)."""


class MisalignedAssignment(ValueError):
    """A cluster assignment does not line up with the token rows it should cover."""


class ShapeMismatch(ValueError):
    """Array shapes are inconsistent with the merge record or each other."""


class KeepRateTooLow(ValueError):
    """Bipartite matching cannot remove more than half of the mergeable tokens."""


class BlockOutOfRange(ValueError):
    """Block index lies outside the schedule's valid range."""


class NonPositiveSize(ValueError):
    """Token sizes must be strictly positive."""


class TensorFileError(ValueError):
    """A tensor file is malformed (bad header, wrong payload length, ...)."""
