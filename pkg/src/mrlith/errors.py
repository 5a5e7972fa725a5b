"""Exception hierarchy and the CLI exit codes they map to."""


class MRLError(Exception):
    exit_code = 1


class ConfigurationError(MRLError, ValueError):
    """Invalid parameters, guard violations and unsynthesizable requests."""

    exit_code = 2


class DomainError(ConfigurationError):
    """Argument outside the domain of a physical formula."""


class ResolvabilityError(ConfigurationError):
    """Column pulses cannot separate adjacent columns."""


class ParseError(ConfigurationError):
    """Malformed input file; carries the offending line and column."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.line = line
        self.column = column


class SchemaError(ParseError):
    """Stage file with a missing or mismatched versioned header."""


class StabilityError(MRLError, ArithmeticError):
    """Integrator step too large for the Hamiltonian scale."""

    exit_code = 3


class MeasurementError(MRLError, ArithmeticError):
    """A metric cannot be measured on the given profile."""

    exit_code = 3
