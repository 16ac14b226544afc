"""Exception hierarchy.

Every error raised by the library derives from :class:`ChanlinkError`, which is
itself a :class:`ValueError` so callers that only care about bad input can catch
the builtin.
"""


class ChanlinkError(ValueError):
    """Base class for all library errors."""


class LabelCollision(ChanlinkError):
    pass


class UnknownLeg(ChanlinkError):
    pass


class BadPermutation(ChanlinkError):
    pass


class ShapeError(ChanlinkError):
    pass


class NotHermitian(ChanlinkError):
    pass


class NotPSD(ChanlinkError):
    pass


class TooLarge(ChanlinkError):
    """A Kronecker chain would exceed the dense-dimension guard."""


class NotTracePreserving(ChanlinkError):
    pass


class NotCPTP(ChanlinkError):
    pass


class NotIsometry(ChanlinkError):
    pass


class LinkError(ChanlinkError):
    """Shared legs of a link product are missing or have mismatched dimensions."""


class NotUnitTrace(ChanlinkError):
    pass


class BadEpsilon(ChanlinkError):
    pass


class NotCommuting(ChanlinkError):
    pass


class ParamRange(ChanlinkError):
    pass
