"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit with 2,
resource exhaustion (budgets, caps, truncation) with 3.
"""


class PfaffError(Exception):
    """Base class for all package errors."""


class ParseError(PfaffError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ContextMismatch(PfaffError):
    pass


class ShapeMismatch(PfaffError):
    pass


class RankMismatch(PfaffError):
    pass


class UnderdeterminedSystem(PfaffError):
    pass


class NonIntegrable(PfaffError):
    pass


class SingularVectorField(PfaffError):
    pass


class DegeneratePack(PfaffError):
    pass


class BudgetExceeded(PfaffError):
    """Raised when a Groebner computation passes its S-pair budget."""

    def __init__(self, budget: int, pairs_processed: int):
        super().__init__(
            f"S-pair budget {budget} exceeded after {pairs_processed} pairs"
        )
        self.budget = budget
        self.pairs_processed = pairs_processed


class TruncationUnstable(PfaffError):
    """Two truncation orders disagreed; the series answer cannot be trusted."""


class InvalidManifest(PfaffError):
    pass
