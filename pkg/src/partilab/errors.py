"""Exception hierarchy shared by every partilab module."""


class PartilabError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(PartilabError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(InvalidInputError):
    """A learner or CLI configuration is inconsistent."""


class PreconditionError(InvalidInputError):
    """A solver was called on an instance outside its domain."""


class InstanceTooLargeError(PartilabError):
    """Exhaustive enumeration would exceed the configured cap."""


class BudgetExhaustedError(PartilabError):
    """The feedback environment refused a query because its budget is spent."""


class NotAvailableError(PartilabError):
    """Requested information (e.g. ground truth) is hidden."""


class SamplingError(PartilabError):
    """No subgraph with the requested properties exists."""


class ParseError(InvalidInputError):
    """An input file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip())
        self.path = path
        self.line = line
