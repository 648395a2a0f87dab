"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented exit statuses without a lookup table.
"""


class MaintvarError(Exception):
    exit_code = 2


class DataError(MaintvarError):
    """Input data violates a precondition (exit code 2)."""

    exit_code = 2


class NumericError(MaintvarError):
    """A numerical procedure cannot produce a trustworthy answer (exit code 3)."""

    exit_code = 3


# ingest
class MissingColumn(DataError):
    pass


class EmptyFile(DataError):
    pass


class DuplicateDate(DataError):
    pass


class BadDate(DataError):
    pass


class LeadingGap(DataError):
    pass


class AllMissingColumn(DataError):
    pass


# textfeat
class LexiconError(DataError):
    pass


class EmptyDataset(DataError):
    pass


class AlreadyScaled(DataError):
    pass


# statcheck
class SeriesTooShort(DataError):
    pass


class ConstantSeries(DataError):
    pass


class TargetMissing(DataError):
    pass


# varmodel / evaluate
class InsufficientRows(DataError):
    pass


class HistoryTooShort(DataError):
    pass


class RankDeficientDesign(NumericError):
    pass


class SingularSigma(NumericError):
    pass


class UnstableSpec(NumericError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class ZeroActual(DataError):
    pass


# rfimpact
class TooFewRows(DataError):
    pass


class NoFeatures(DataError):
    pass


class DimensionMismatch(DataError):
    pass


# plotting
class EmptySeries(DataError):
    pass
