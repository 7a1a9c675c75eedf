"""Exception types and runtime invariant bookkeeping."""
from collections import Counter


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidInput(ValueError):
    """Malformed input such as a bad degree or duplicate decisions."""


class MissingExactSolution(ValueError):
    """A diagnostic needs the exact solution but the problem has none."""


class SolverError(RuntimeError):
    """The discrete system could not be solved reliably.

    Attributes:
        condition: estimated 2-norm condition number of the matrix, if known.
        iteration: adaptive iteration at which the failure happened, if known.
    """

    def __init__(self, message, condition=None, iteration=None):
        super().__init__(message)
        self.condition = condition
        self.iteration = iteration

    def __str__(self):
        msg = super().__str__()
        if self.condition is not None:
            msg += f" (condition estimate {self.condition:.3e})"
        if self.iteration is not None:
            msg += f" at iteration {self.iteration}"
        return msg


class InvariantViolation(AssertionError):
    """A mathematical invariant checked at runtime does not hold."""


# Number of runtime checks performed per invariant name; read by the
# acceptance suite to prove the checks actually ran.
CHECKS = Counter()


def check(name, condition, message):
    CHECKS[name] += 1
    if not condition:
        raise InvariantViolation(f"{name}: {message}")
