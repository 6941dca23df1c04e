"""Exception hierarchy shared by all modules."""


class BiasedTreeError(ValueError):
    """Base class for every error raised by this package."""


class DegreeTooSmall(BiasedTreeError):
    pass


class NonPositiveLambda(BiasedTreeError):
    pass


class NonFinite(BiasedTreeError):
    pass


class InexactParameter(BiasedTreeError):
    """Rational arithmetic was requested but the bias is stored as a float."""


class CapacityExceeded(BiasedTreeError):
    pass


class DomainError(BiasedTreeError):
    pass


class NotTransient(BiasedTreeError):
    pass


class NotCoveredRegime(BiasedTreeError):
    pass
