"""Error types shared across the pipeline."""


class FlowEmbedError(Exception):
    """Base class for all pipeline errors."""


class EmptySource(FlowEmbedError):
    """Input source code is empty after whitespace stripping."""


class ParseRejected(FlowEmbedError):
    """Strict parsing found a grammar error.

    Carries the byte span of the first error node as ``span``.
    """

    def __init__(self, message, span):
        super().__init__(message)
        self.span = span


class UnsupportedFormat(FlowEmbedError):
    """Unknown export or file format tag."""


class FormatError(FlowEmbedError):
    """File content does not match the expected schema."""


class DataError(FlowEmbedError):
    """File content is schema-valid but carries illegal values."""


class InvalidDimension(FlowEmbedError):
    """Requested embedding width is not usable."""


class ShapeError(FlowEmbedError):
    """Matrix or vector widths do not chain."""


class EmptyGraph(FlowEmbedError):
    """Operation requires at least one graph node."""


class ContractViolation(FlowEmbedError):
    """A documented call contract was broken by the caller."""


class EmptyDataset(FlowEmbedError):
    """Training requires a nonempty split."""


class TooSmall(FlowEmbedError):
    """Corpus too small to split."""
