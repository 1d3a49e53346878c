"""Error taxonomy shared by the library and the CLI.

The CLI maps these onto exit codes: InputError -> 2, BudgetError -> 3,
VerificationError -> 4. Library code raises them directly.
"""


class InputError(ValueError):
    """Malformed or inconsistent input (bad shapes, NaN/Inf, bad headers)."""


class BudgetError(RuntimeError):
    """An enumeration or size budget would be exceeded.

    Carries the offending requirement so callers can report
    "required vs allowed" without string parsing.
    """

    def __init__(self, message, required=None, allowed=None):
        super().__init__(message)
        self.required = required
        self.allowed = allowed


class VerificationError(AssertionError):
    """A verification oracle measured an error above its threshold."""

    def __init__(self, message, measured=None, threshold=None):
        super().__init__(message)
        self.measured = measured
        self.threshold = threshold
