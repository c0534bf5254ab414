"""Exception types raised across the package."""


class IrAugmentError(Exception):
    """Base class for all errors raised by this package."""


class DataFormatError(IrAugmentError):
    """A CSV or ARFF file could not be parsed."""


class MissingTargetError(DataFormatError):
    """The declared target column is not present in the file."""


class MissingCellError(DataFormatError):
    """A row has an empty or absent cell; datasets must be dense."""


class UnparseableCellError(DataFormatError):
    """A cell could not be converted to the column's declared kind."""


class UndeclaredCategoryError(DataFormatError):
    """An ARFF data row uses a nominal value absent from its declaration."""


class NoRareRegionError(IrAugmentError):
    """No observed target value lies beyond either adjusted fence, so a
    relevance function cannot be built."""


class EmptyRarePartitionError(IrAugmentError):
    """A threshold-based strategy found no rows at or above the relevance
    threshold (or no rows below it)."""


class ZeroRelevanceMassError(IrAugmentError):
    """All evaluated relevances are zero; a relevance-weighted metric is
    undefined."""


class ManifestError(IrAugmentError):
    """A benchmark run manifest failed validation."""
