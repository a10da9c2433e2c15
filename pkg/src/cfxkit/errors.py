"""Exception types shared across the toolkit."""


class CfxkitError(Exception):
    """Base class for all toolkit errors."""


class ShapeError(CfxkitError, ValueError):
    """Dimension mismatch between operands."""


class ParameterError(CfxkitError, ValueError):
    """Invalid parameter value (step sizes, counts, directions, ...)."""


class DataError(CfxkitError, ValueError):
    """Invalid data content (non-finite values, empty datasets, ...)."""


class PreconditionError(CfxkitError, ValueError):
    """Input violates a documented operation precondition."""


class ParseError(CfxkitError, ValueError):
    """Malformed file content; message carries line/field context."""


class SchemaError(CfxkitError, ValueError):
    """File content is well formed but does not match the expected schema."""


class BindingError(CfxkitError, ValueError):
    """Artifacts that must agree (catalog vs model, ...) do not."""
