"""Exception types raised across the pipeline.

Everything inherits from NutricastError so callers (and the CLI) can catch
one base class. Names follow the operation contracts they guard.
"""

from sklearn.exceptions import NotFittedError


class NutricastError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(NutricastError):
    """Bad CLI flags or an invalid run configuration (exit code 1)."""


# --- ingestion ---

class MissingColumn(NutricastError):
    """A schema-required column is absent from the table header."""


class MalformedRow(NutricastError):
    """A data row could not be parsed; message carries the row index."""

    def __init__(self, row_index, message):
        self.row_index = row_index
        super().__init__(f"row {row_index}: {message}")


# --- projection ---

class OutOfDomain(NutricastError):
    """Coordinate outside the projectable Southern Hemisphere domain."""


class NonFiniteInput(NutricastError):
    """NaN or infinity where a finite value is required."""


# --- feature pipeline ---

class MissingInput(NutricastError):
    """A sample reached the feature builder without all seven inputs."""


class DegenerateColumn(NutricastError):
    """A feature column has zero variance; message names the column."""


class NotFitted(NutricastError, NotFittedError):
    """Transform/predict called before fit."""


class TooFewRows(NutricastError):
    """Not enough rows for the requested split."""


# --- network core ---

class BadConfig(NutricastError):
    """Inconsistent model configuration."""


class ShapeMismatch(NutricastError):
    """Input shape incompatible with the model."""


class LengthMismatch(NutricastError):
    """Prediction and target vectors differ in length."""


class EmptyBatch(NutricastError):
    """An empty batch where at least one row is required."""


class NonFiniteGradient(NutricastError):
    """A gradient block went non-finite; message names the block."""


# --- training / evaluation ---

class NoLabel(NutricastError):
    """Requested target label missing on rows that need it."""


class EmptySubset(NutricastError):
    """Evaluation requested on an empty row subset."""


# --- uncertainty ---

class BadSampleCount(NutricastError):
    """Monte-Carlo sample count below the minimum of 2."""


class TooFewSamples(NutricastError):
    """Interval summary needs at least 2 samples."""


# --- external application ---

class StandardizerMismatch(NutricastError):
    """Standardizer hash differs from the one recorded with the model."""


class EmptyAfterFiltering(NutricastError):
    """No external rows survived the completeness/domain filters."""


class BadCell(NutricastError):
    """Non-positive grid cell size."""


class GridMismatch(NutricastError):
    """Grids differ in cell size or units and cannot be combined."""
