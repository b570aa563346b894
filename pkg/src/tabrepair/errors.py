"""Exception types shared across the package."""


class TabRepairError(Exception):
    """Base class for all package errors."""


class RuleParseError(TabRepairError):
    """Raised when rule-DSL text is malformed.

    Carries the 1-based line and column of the offending token when known.
    """

    def __init__(self, message, line=None, column=None):
        location = ""
        if line is not None:
            location = f" (line {line}"
            location += f", column {column})" if column is not None else ")"
        super().__init__(message + location)
        self.line = line
        self.column = column


class TautologyError(RuleParseError):
    """A rule with an empty component can never fail and is rejected."""


class ContradictionError(RuleParseError):
    """A rule whose components all span the full domain can never hold."""


class UnknownAttributeError(TabRepairError):
    """A rule or role declaration references an attribute not in the data."""


class UnsatisfiableRulesError(TabRepairError):
    """No assignment can satisfy the rule set; repairing is impossible."""


class CapExceededError(TabRepairError):
    """A configured resource limit was hit; results would be incomplete."""


class DataError(TabRepairError):
    """Malformed tabular input (ragged rows, duplicate headers, null keys...)."""


class CostModelError(TabRepairError):
    """A cost table violates positive-definiteness or integrality."""


class KeyMisalignmentError(TabRepairError):
    """Relations passed to evaluation do not share key values."""
