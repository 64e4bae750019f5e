"""Exception types raised by the geometry and avoidance layers."""


class RoamError(Exception):
    """Base class for all library errors."""


class AntiCollinear(RoamError):
    """Two directions point in (numerically) opposite directions."""


class DegenerateSaddle(RoamError):
    """Convergence direction coincides with the inward reference direction."""


class AtReferencePoint(RoamError):
    """Query point coincides with an obstacle reference point."""


class AtAttractor(RoamError):
    """Query point coincides with the attractor of a folding frame."""


class FoldSingularity(RoamError):
    """Query point lies on the line opposite to the reference point."""


class IncompatibleChain(RoamError):
    """Consecutive rotations of a sequence do not connect."""


class WeightSumInvalid(RoamError):
    """Tree weights are out of range or do not sum to one."""


class TreeDepthExceeded(RoamError):
    """A rotation tree is deeper than the supported number of levels."""


class DegenerateRay(RoamError):
    """A surface propagation ray has zero length."""


class AllBoundariesViolated(RoamError):
    """The query point lies outside every enclosing hull."""


class ScenarioInvalid(RoamError):
    """A scenario failed validation.

    The individual problems are kept in ``violations``.
    """

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)
