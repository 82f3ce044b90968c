"""Exception types shared across the package."""


class InputDomainError(ValueError):
    """An input lies outside the domain of an operation (non-finite, infeasible)."""


class EvaluationError(ArithmeticError):
    """The objective returned a non-finite value."""


class UnsupportedOperationError(NotImplementedError):
    pass


class InvalidScheduleError(ValueError):
    """A step-size schedule violates one of the step-size conditions.

    ``clause`` is a short key naming the violated condition: ``initial_step``,
    ``divergent``, ``square_summable``, ``ratio`` or ``monotone``.
    """

    def __init__(self, clause, message):
        super().__init__(f"[{clause}] {message}")
        self.clause = clause


class ConfigurationError(ValueError):
    pass


class TraceRangeError(IndexError):
    pass
