"""Exception types shared across the package."""


class RecipeAlignError(Exception):
    """Base class for errors raised by this package."""


class SchemaError(RecipeAlignError):
    """A file does not conform to its expected format (bad JSON, wrong
    columns, inconsistent dimensions). Carries location info when known."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = " ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class ValidationError(RecipeAlignError):
    """Well-formed input violates a domain invariant. Names the field."""

    def __init__(self, message: str, *, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class ConfigError(RecipeAlignError):
    """A configuration is internally inconsistent or infeasible."""
