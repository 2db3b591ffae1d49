"""Exception types shared across the toolkit."""


class StructureError(ValueError):
    """Malformed problem data: bad sparse indices, NaN coefficients, length mismatches."""


class ParseError(ValueError):
    """Instance file could not be parsed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnsupportedFeatureError(ParseError):
    """The file uses a construct outside the supported format subset."""


class InvalidActionError(ValueError):
    """The supplied action is not in the current action set."""


class EnvProtocolError(RuntimeError):
    """An environment or engine call violated the reset/step state machine."""


class ConfigurationError(ValueError):
    """Incompatible environment composition (task vs. observation/reward)."""


class ParameterError(ValueError):
    """Unknown solver parameter name or out-of-domain value."""


class GenerationError(ValueError):
    """Instance generator parameters cannot produce a valid instance."""
