"""Exception hierarchy shared by all modules and mapped to CLI exit codes."""


class KStabError(Exception):
    """Base class for every error raised by this package."""


# numeric kernel
class IntervalOutOfDomain(KStabError):
    pass


class DomainMismatch(KStabError):
    pass


class Overflow(KStabError):
    pass


class BadBracket(KStabError):
    pass


class NoConvergence(KStabError):
    pass


# data model
class ParseError(KStabError):
    pass


class ValidationError(KStabError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class UnknownName(KStabError):
    pass


# weights / invariants
class NoRoot(KStabError):
    pass


class DegenerateVolume(KStabError):
    pass


class UnknownPoint(KStabError):
    pass


# verdicts: every one of these means a hypothesis of the criterion is violated
class PreconditionFailed(KStabError):
    pass


class NotAWeight(PreconditionFailed):
    pass


class NotLogFano(PreconditionFailed):
    pass


class MuOutOfRange(PreconditionFailed):
    pass


class InternalInconsistency(KStabError):
    pass
