"""Exception hierarchy shared by all zonokit modules."""


class ZonokitError(Exception):
    """Base class for all errors raised by zonokit."""


class ShapeMismatch(ZonokitError):
    """Matrix/vector blocks with inconsistent shapes."""


class DimensionMismatch(ShapeMismatch):
    """Operands with different ambient dimensions."""


class DomainViolation(ZonokitError):
    """Elementary function evaluated outside its domain."""


class DivByIntervalContainingZero(DomainViolation):
    """Interval division by a divisor that straddles or touches zero."""


class NonDifferentiable(DomainViolation):
    """Derivative requested where the function is not differentiable."""


class UnsupportedConversion(ZonokitError):
    """Requested set conversion is not in the lossless conversion lattice."""


class UnsupportedMethod(ZonokitError):
    """Propagation/estimation method not available for this representation."""


class DimensionUnsupported(ZonokitError):
    """Operation only implemented for a specific ambient dimension (e.g. 2-D)."""


class EmptySet(ZonokitError):
    """Operation requires a nonempty set."""


class UnboundedSet(ZonokitError):
    """Operation requires a bounded set."""


class UnboundedSlack(ZonokitError):
    """Halfspace intersection could not bound its slack variable."""


class NotALiftedSet(ZonokitError):
    """unlift() applied to a zonotope that does not carry lift metadata."""


class TargetTooSmall(ZonokitError):
    """Reduction target below the representable minimum."""


class BudgetExceeded(ZonokitError):
    """Combinatorial work would exceed the configured budget."""


class DegenerateZonotope(ZonokitError):
    """Generator matrix does not span the ambient space."""


class NumericalFailure(ZonokitError):
    """Solver gave up without a trustworthy status."""


class NodeBudgetExceeded(NumericalFailure):
    """Branch-and-bound node budget exhausted before proving optimality."""


class InfeasibleLP(ZonokitError):
    """Internal: LP reported infeasible where a feasible point was required."""


class IllPosedDescriptor(ZonokitError):
    """Descriptor step equation has no consistent solution."""


class MissingAdmissibleBound(ZonokitError):
    """CZ descriptor estimation needs a bounded admissible state box."""


class InfeasibleSeparation(ZonokitError):
    """No admissible input sequence separates the model output tubes."""


class ConfigInvalid(ZonokitError):
    """Experiment configuration failed validation.

    Carries the JSON path of the offending field when known.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
