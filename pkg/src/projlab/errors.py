"""Exception hierarchy shared by all projlab modules."""


class ProjLabError(Exception):
    """Base class for every error raised by projlab."""


class InvalidInput(ProjLabError, ValueError):
    pass


class NumericalFailure(ProjLabError, ArithmeticError):
    pass


class NotAnEigenvector(ProjLabError, ValueError):
    """A vector failed the eigen-residual test required by a closed-form map."""


class PreconditionViolated(ProjLabError, ValueError):
    """The start vector lies outside A ∪ B, so the A ∪ B results do not apply."""


class DegenerateStart(ProjLabError, ValueError):
    """The start has no component driving a nontrivial rate.

    For MAP this means ``P_A P_B x0 = P_{A∩B} x0`` (convergence in one step).
    """


class OrthogonalSubspaces(ProjLabError, ValueError):
    pass


class InsufficientData(ProjLabError, ValueError):
    pass


class NotApplicable(ProjLabError, ValueError):
    pass


class NoSuchStart(ProjLabError, ValueError):
    """No start vector with MSP faster than MAP exists (requires cos θ_F > 1/2)."""
