"""Exception hierarchy shared by every csrs module."""

from __future__ import annotations


class CsrsError(Exception):
    """Base class for all library errors."""


class InputError(CsrsError):
    """Malformed or inconsistent user input (CLI exit code 2)."""


class ComputationError(CsrsError):
    """A numerical or deductive computation could not be completed (exit code 1)."""


# numerics
class NoConvergence(ComputationError):
    pass


class DegenerateInput(InputError):
    pass


class StepTooCoarse(ComputationError):
    pass


class BranchLoss(ComputationError):
    pass


class BranchCollision(ComputationError):
    pass


class NewtonDivergence(ComputationError):
    pass


class ClearanceViolation(InputError):
    pass


# presentations
class InvalidFraction(InputError):
    pass


class SchemaError(InputError):
    pass


class InvariantViolation(InputError):
    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


# riley
class ZeroT(InputError):
    pass


class NormalizationFailure(ComputationError):
    pass


# repfinder
class EliminationOverflow(ComputationError):
    pass


class AmbiguousClass(ComputationError):
    pass


class RankAmbiguous(ComputationError):
    pass


class PreconditionFailed(InputError):
    pass


# csintegrator
class EigenframeSwap(ComputationError):
    pass


class ImaginaryResidue(ComputationError):
    pass


class DisconnectedPlan(InputError):
    pass


class NoRouteFound(ComputationError):
    pass


# rscalc
class NotCoprime(InputError):
    pass


class UnassertedRSign(InputError):
    pass


class ParameterMismatch(InputError):
    pass


class HypothesisUnmet(ComputationError):
    def __init__(self, hypothesis: str, detail: str = ""):
        self.hypothesis = hypothesis
        super().__init__(f"hypothesis unmet: {hypothesis}" + (f" ({detail})" if detail else ""))


class IntervalOverlap(ComputationError):
    pass


class InconsistentStore(ComputationError):
    pass


class SpectrumIncomplete(ComputationError):
    pass


class QuerySyntaxError(InputError):
    pass
