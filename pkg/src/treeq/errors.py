"""Exception types shared across the package."""


class TreeqError(Exception):
    """Base class for all package-specific errors."""


class OutOfDomainAction(TreeqError):
    """A grounded action carried a parameter outside its declared domain."""


class EpisodeFinished(TreeqError):
    """step() was called on an environment whose episode already ended."""


class MalformedLayout(TreeqError):
    """An environment layout file failed to parse or validate."""


class UnsplittableLeaf(TreeqError):
    """Refinement was requested on a leaf with no splittable dimension."""


class DegenerateModel(TreeqError):
    """A classifier predicts a single class on its own training set."""


class SingleClass(TreeqError):
    """Classifier training data contained fewer than two distinct labels."""


class DimensionMismatch(TreeqError):
    """Input vector dimension does not match the trained model."""


class InsufficientData(TreeqError):
    """Too few samples to compute the requested statistic."""


class MalformedTree(TreeqError):
    """A serialized tree dump is truncated, versioned wrong, or inconsistent."""


class MalformedInput(TreeqError):
    """A metrics or checkpoint artifact could not be parsed."""
