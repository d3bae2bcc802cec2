"""Exception hierarchy shared by every pipeline stage."""


class LogoDMError(Exception):
    """Base class for all errors raised by logodm."""


class ParameterError(LogoDMError, ValueError):
    pass


class SchemaError(LogoDMError, ValueError):
    pass


class SchemaConflictError(SchemaError):
    """Two relations declare the same attribute name differently."""


class DisjointSchemaError(SchemaError):
    """A join was requested between relations without a shared attribute."""


class UnknownAttributeError(SchemaError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class MalformedCodeError(LogoDMError, ValueError):
    """A coded-flag integer holds a decimal digit other than 0 or 1."""

    def __init__(self, raw, position, digit):
        super().__init__(
            f"malformed code {raw}: digit {digit} at position {position} "
            "(0 = least significant)"
        )
        self.raw = raw
        self.position = position
        self.digit = digit


class CodeOverflowError(LogoDMError, ValueError):
    pass


class UnknownFlagError(LogoDMError, ValueError):
    pass


class UnimputedDataError(LogoDMError, ValueError):
    """A stage that needs complete data met a Missing cell."""


class PolicyPreconditionError(LogoDMError, ValueError):
    pass


class ShapeError(LogoDMError, ValueError):
    pass


class EmptyInputError(LogoDMError, ValueError):
    pass


class InsufficientDataError(LogoDMError, ValueError):
    pass
