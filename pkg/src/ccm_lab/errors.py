"""Exception hierarchy shared by every module of the engine."""


class CcmError(Exception):
    """Base class for all engine errors."""


class InvalidTable(CcmError):
    pass


class InvalidAction(CcmError):
    pass


class InvalidPairing(CcmError):
    pass


class MixedGroups(CcmError):
    """Operands belong to different group handles."""


class UnsupportedForClass(CcmError):
    pass


class QuotientTooLarge(CcmError):
    pass


class NotNormal(CcmError):
    pass


class NotAPartition(CcmError):
    pass


class AtomTooSmall(CcmError):
    pass


class EnumerationExhausted(CcmError):
    """The bounded search horizon ran out before a valid choice appeared."""


class HypothesisFails(CcmError):
    pass


class InvariantViolation(CcmError):
    """A certified recomputation disagreed with the claimed result."""
