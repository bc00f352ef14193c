"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class RqaError(Exception):
    exit_code = 1


class ParseError(RqaError):
    exit_code = 2

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ArityError(ParseError):
    pass


class SafetyError(RqaError):
    exit_code = 3

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("\n".join(str(v) for v in self.violations))


class DataError(RqaError):
    exit_code = 4


class EvaluationError(RqaError):
    """Comparison type errors and the firing cap."""

    exit_code = 4


class MappingGapError(RqaError):
    exit_code = 5

    def __init__(self, predicates):
        self.predicates = sorted(predicates)
        super().__init__(
            "essential predicates without a mapping: " + ", ".join(self.predicates)
        )
