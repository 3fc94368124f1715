"""Exception types shared across the toolkit.

Every error raised by this package derives from :class:`PortrayalError`, so
callers (notably the CLI) can map failures onto exit codes by family:
config problems, I/O problems, and data problems.
"""


class PortrayalError(Exception):
    """Base class for all package errors."""


class ConfigError(PortrayalError):
    """A run configuration is incomplete or inconsistent."""


class DataError(PortrayalError):
    """Input data violates a documented contract."""


# --- corpus ingest ---------------------------------------------------------

class MalformedLine(DataError):
    """An n-gram shard line does not parse into a valid record."""


# --- roster ----------------------------------------------------------------

class MissingColumn(DataError):
    """A delimited input file lacks a required header column."""


class EndpointUnreachable(PortrayalError):
    """The roster endpoint could not be reached and no fixture was given."""


class QueryRejected(PortrayalError):
    """The roster endpoint rejected the query (non-retryable status)."""


# --- context tables --------------------------------------------------------

class KeyMismatch(DataError):
    """Tables for different (decade, group) keys cannot be merged."""


class EmptyTable(DataError):
    """An operation needs a context table with non-zero total weight."""


# --- embedding spaces ------------------------------------------------------

class DimensionMismatch(DataError):
    """A vector's length disagrees with the space dimension."""


class EmptyFile(DataError):
    """A vector file contains no usable entries."""


class ZeroNorm(DataError):
    """A cosine was requested for a zero-length vector."""


class TooFewWords(DataError):
    """Fewer pole/list words were found in the space than required."""

    def __init__(self, found: int, minimum: int, message: str | None = None):
        self.found = found
        self.minimum = minimum
        super().__init__(message or f"found {found} words, need at least {minimum}")


# --- contrastive training --------------------------------------------------

class DegenerateDistribution(DataError):
    """All sampling weights are zero (or no word survives the space filter)."""


class NonFiniteLoss(PortrayalError):
    """Training diverged: the group vector or its loss became non-finite."""


# --- semantic axes ---------------------------------------------------------

class DuplicateAxis(DataError):
    """Two axes in one file share an axis id."""


class EmptyPole(DataError):
    """An axis definition has an empty pole."""


class AxisExcluded(DataError):
    """An axis has fewer than the minimum pole words present in a space."""


class NoUsableAxes(DataError):
    """No axis (or no lexicon word) qualifies for toxic-affinity ranking."""


# --- toxicity --------------------------------------------------------------

class EmptyLexicon(DataError):
    """The lexicon is empty after the level filter."""


# --- diachronic statistics -------------------------------------------------

class ConstantInput(DataError):
    """Pearson correlation is undefined for a constant vector."""


class TooFewDecades(DataError):
    """A correlation matrix needs at least two decades."""


class IntervalMissing(DataError):
    """The requested decade transition is not present in the matrix."""


class TooFewTransitions(DataError):
    """The pooled KS comparison needs at least three transitions."""


class EmptySample(DataError):
    """The KS test needs two non-empty samples."""
