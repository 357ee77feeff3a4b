"""Exception types shared across the package."""


class CMError(Exception):
    """Base class for all errors raised by this package."""


class HypothesisViolation(CMError):
    """An input violates a standing hypothesis; ``clause`` names the failed check."""

    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        self.detail = detail
        super().__init__(f"{clause}: {detail}" if detail else clause)


class NonCoprimeIdeal(HypothesisViolation):
    def __init__(self, detail: str = ""):
        super().__init__("non-coprime ideal", detail)


class IneligiblePrime(HypothesisViolation):
    def __init__(self, p: int, reason: str):
        self.p = p
        self.reason = reason
        super().__init__("ineligible prime", f"p={p}: {reason}")


class SearchBudgetExceeded(CMError):
    """A bounded search ran out of budget before finding what it needed."""


class RelationSearchIncomplete(SearchBudgetExceeded):
    """Class group relation search did not reach full rank within budget."""


class VerificationFailed(CMError):
    """A constructed object failed its own post-condition check."""


class ClosureFailure(VerificationFailed):
    """A lattice expected to be a ring is not closed under multiplication."""


class NonIntegerResult(CMError):
    """A quantity that should be integral came out fractional."""
