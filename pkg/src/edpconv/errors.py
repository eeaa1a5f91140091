"""Exception hierarchy shared by all modules."""


class EdpconvError(Exception):
    """Base class for toolkit errors."""


class InvalidBipotential(EdpconvError, ValueError):
    pass


class EmptyContactSet(EdpconvError):
    """No sampled pair reaches Fenchel-Young equality within tolerance."""


class NonMonotoneContact(EdpconvError):
    """Contact pairs do not form a monotone relation through the origin."""


class OffGrid(EdpconvError, KeyError):
    pass


class DegenerateGrid(EdpconvError, ValueError):
    pass


class OutOfDomain(EdpconvError, ValueError):
    pass


class StiffnessFailure(EdpconvError):
    pass


class NonInvertibleKineticRelation(EdpconvError):
    pass


class RootBracketFailure(EdpconvError):
    pass


class NonConvergence(EdpconvError):
    pass


class LinearSolveFailure(EdpconvError):
    pass


class PositivityLoss(EdpconvError):
    pass


class ConfigError(EdpconvError):
    pass
