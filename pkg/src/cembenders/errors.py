"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so callers (the CLI in
particular) can map failures without string matching.
"""

from __future__ import annotations


class CEMError(Exception):
    code = "ERROR"

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details


class SpecInvalid(CEMError):
    code = "SPEC_INVALID"


class InstanceInvalid(CEMError):
    code = "INSTANCE_INVALID"


class NumericalBreakdown(CEMError):
    code = "NUMERICAL_BREAKDOWN"


class Infeasible(CEMError):
    code = "INFEASIBLE"


class NodeLimit(CEMError):
    code = "NODE_LIMIT"

    def __init__(self, message: str, solution=None, **details):
        super().__init__(message, **details)
        self.solution = solution


class ParseError(CEMError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int | None = None, **details):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message, line=line, **details)
        self.line = line


class SubproblemError(CEMError):
    code = "SUBPROBLEM_NUMERICAL"

    def __init__(self, message: str, subperiod: int | None = None, **details):
        super().__init__(message, subperiod=subperiod, **details)
        self.subperiod = subperiod


class BoundOrder(CEMError):
    code = "BOUND_ORDER"
