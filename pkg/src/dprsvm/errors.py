"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so keep the split between
parse-, dimension-, capacity- and configuration-order failures intact.
"""


class DprsvmError(Exception):
    """Base class for every error raised by this package."""


class ParseError(DprsvmError):
    """A text artifact (model, weights, instances, bitstream...) is malformed."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        if prefix:
            prefix += " "
        super().__init__(prefix + message)


class UnsupportedKernelError(ParseError):
    """Model file declares a kernel other than linear (kernel type 0)."""


class StructuralError(DprsvmError):
    """An in-memory value violates a structural invariant (counts, finiteness)."""


class DimensionMismatchError(DprsvmError):
    """Feature dimensions disagree between a model/artifact and an instance."""


class CapacityError(DprsvmError):
    """A footprint does not fit the target device."""


class ConfigOrderError(DprsvmError):
    """A configuration action was attempted in an illegal device state."""
