class ParameterError(ValueError):
    """Invalid numeric parameter (out of range, inconsistent sizes...)."""


class InputFormatError(ValueError):
    """Malformed input file or stream line."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class ProtocolError(RuntimeError):
    """A worker was asked to touch state it does not own."""


class RoutingError(ValueError):
    """An update names a vertex outside the partitioned range."""
