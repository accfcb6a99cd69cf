"""Exception types raised across the package."""


class TickJoinError(Exception):
    """Base class for all tickjoin errors."""


class EmptyBatch(TickJoinError):
    """An operation that needs at least one object got an empty batch."""


class OutOfBounds(TickJoinError):
    """A point lies outside the rectangle it must be mapped within."""


class LevelOrder(TickJoinError):
    """A Morton code was truncated towards a deeper level."""


class BadSplitFactor(TickJoinError):
    """Uniform grid split factor outside the supported range."""


class TilingGap(TickJoinError):
    """Quadtree leaves do not tile the MBR (internal consistency failure)."""


class CountMismatch(TickJoinError):
    """Decoded result count disagrees with the filtering-phase popcount."""


class DuplicateResult(TickJoinError):
    """The same (query, object) pair was produced by two subqueries."""


class BadConfig(TickJoinError):
    """Invalid workload or method configuration."""


class BadQos(TickJoinError):
    """QoS parameters violate the latency model preconditions."""


class VerificationFailure(TickJoinError):
    """Engine output differs from the brute-force oracle."""
