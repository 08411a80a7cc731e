"""Exception types shared across the package."""


class FmgramError(Exception):
    """Base class for all package errors."""


class EmptyCorpus(FmgramError):
    """Raised when an operation needs at least one document and got none."""


class DocTooLarge(FmgramError):
    """A single document exceeds the target shard size."""


class LengthMismatch(FmgramError):
    """Two structures that must agree on length do not."""


class OutOfBounds(FmgramError):
    """A position or rank argument is outside the valid range."""


class NotEnoughOccurrences(FmgramError):
    """select(c, k) was asked for more occurrences than exist."""


class EmptyQuery(FmgramError):
    """Queries must be nonempty."""


class InvalidQuery(FmgramError):
    """Query contains reserved bytes (0x00/0xFF) or is otherwise unusable."""


class UnknownIndex(FmgramError):
    """The named corpus index does not exist or cannot be opened."""


class BadMagic(FmgramError):
    """File does not start with the expected magic bytes."""


class VersionMismatch(FmgramError):
    """File format version is not supported by this build."""


class ChecksumMismatch(FmgramError):
    """A section's stored checksum does not match its content."""


class ShardUnavailable(FmgramError):
    """A shard failed to answer; the message names the shard."""


class ReconstructFailure(FmgramError):
    """Document reconstruction failed; the message names shard and rank."""


class MalformedBenchmark(FmgramError):
    """Benchmark file is not valid JSON Lines or lacks the text field."""
