"""Exception types raised across the library.

Every structured failure names the witnessing indices or ids so callers
(and the CLI) can report exactly which axiom or contract broke.
"""

from __future__ import annotations


class CondensaError(Exception):
    """Base class for all library errors."""


# ---------------------------------------------------------------------------
# Metric axiom violations (validate_metric)
# ---------------------------------------------------------------------------

class MetricValidationError(CondensaError):
    """A distance matrix violated one of the metric axioms."""


class AsymmetricDistance(MetricValidationError):
    def __init__(self, i: int, j: int, dij: float, dji: float):
        self.i, self.j = i, j
        super().__init__(f"dist[{i}][{j}]={dij!r} != dist[{j}][{i}]={dji!r}")


class NegativeDistance(MetricValidationError):
    def __init__(self, i: int, j: int, value: float):
        self.i, self.j = i, j
        super().__init__(f"dist[{i}][{j}]={value!r} is negative")


class NonzeroDiagonal(MetricValidationError):
    def __init__(self, i: int, value: float):
        self.i = i
        super().__init__(f"dist[{i}][{i}]={value!r} is not zero")


class TriangleViolation(MetricValidationError):
    def __init__(self, i: int, j: int, k: int, excess: float):
        self.i, self.j, self.k = i, j, k
        super().__init__(
            f"dist[{i}][{k}] exceeds dist[{i}][{j}] + dist[{j}][{k}] by {excess!r}"
        )


class MatrixFormatError(CondensaError):
    """Input is not a square matrix of finite reals."""


# ---------------------------------------------------------------------------
# Degenerate inputs
# ---------------------------------------------------------------------------

class EmptySpace(CondensaError):
    """Operation on a space with no points."""


class InvalidEpsilon(CondensaError):
    """epsilon <= 0, or a resolution constraint (e.g. h <= eps/4) failed."""


class TooLargeForExact(CondensaError):
    def __init__(self, n: int, limit: int):
        self.n, self.limit = n, limit
        super().__init__(f"space has {n} points, exact solver capped at {limit}")


# ---------------------------------------------------------------------------
# Quotient construction
# ---------------------------------------------------------------------------

class PartitionMismatch(CondensaError):
    """Partition does not belong to the space being quotiented."""


class EmptyRegion(CondensaError):
    """contract_region called with an empty region."""


class UnknownPoint(CondensaError):
    def __init__(self, point_id):
        self.point_id = point_id
        super().__init__(f"unknown point id {point_id!r}")


# ---------------------------------------------------------------------------
# Separators
# ---------------------------------------------------------------------------

class OverlappingSets(CondensaError):
    """Zero set and one set intersect."""


class ZeroGap(CondensaError):
    """min distance between the zero set and one set is 0."""


class IncompatiblePartition(CondensaError):
    """A partition class holds two distinct separator values."""

    def __init__(self, class_id, v1: float, v2: float, level: int | None = None):
        self.class_id, self.v1, self.v2 = class_id, v1, v2
        self.level = level
        where = f" at level {level}" if level is not None else ""
        super().__init__(
            f"class {class_id!r}{where} mixes separator values {v1!r} and {v2!r}"
        )


class BinningError(CondensaError):
    """A separator value has no legal fiber under the requested binning."""


# ---------------------------------------------------------------------------
# Hierarchy / telescoping
# ---------------------------------------------------------------------------

class InvalidRho(CondensaError):
    def __init__(self, rho: float):
        self.rho = rho
        super().__init__(f"compression factor must exceed 1, got {rho!r}")


# ---------------------------------------------------------------------------
# Parity updates
# ---------------------------------------------------------------------------

class PhaseViolation(CondensaError):
    """An update carries a nonzero delta in its frozen block."""


class DimensionMismatch(CondensaError):
    """Vector or matrix shapes do not match the state's blocks."""


class NotPositiveDefinite(CondensaError):
    """A metric block failed the Cholesky factorization check."""


# ---------------------------------------------------------------------------
# Inference benchmarks
# ---------------------------------------------------------------------------

class DepthExhausted(CondensaError):
    def __init__(self, depth: int, needed_hops: int):
        self.depth, self.needed_hops = depth, needed_hops
        super().__init__(
            f"recursion depth {depth} allows 2^{depth} hops, path needs {needed_hops}"
        )


class NoPath(CondensaError):
    """Greedy navigation stalled before reaching the goal's token."""


class BudgetExceeded(CondensaError):
    """An active region's cover exceeded the declared candidate budget."""


# ---------------------------------------------------------------------------
# CLI / experiments
# ---------------------------------------------------------------------------

class ConfigError(CondensaError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field {field!r}: {message}")


class ExperimentFailed(CondensaError):
    def __init__(self, assertion: str):
        self.assertion = assertion
        super().__init__(f"experiment assertion failed: {assertion}")
