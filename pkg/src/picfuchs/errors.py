"""Exception types raised on violated preconditions.

Every class derives from :class:`PFError` (itself a ``ValueError``) so the CLI
can map precondition failures to exit code 2 without catching genuine bugs.
"""


class PFError(ValueError):
    """Base class for precondition and input errors."""

    kind = "precondition"


class ParseError(PFError):
    kind = "parse"

    def __init__(self, message, span=None, text=None):
        super().__init__(message)
        self.span = span
        self.text = text


class DegreeError(PFError):
    kind = "degree"


class NotRegularError(PFError):
    kind = "not_regular_at_infinity"


class NotQuasimonicError(PFError):
    kind = "not_quasimonic"


class NotBalancedError(PFError):
    kind = "not_balanced"


class IllConditionedError(PFError):
    kind = "ill_conditioned"


class NonIsolatedError(PFError):
    kind = "non_isolated_critical_locus"


class NoOvalError(PFError):
    kind = "no_compact_oval"


class CertificationError(PFError):
    kind = "cannot_certify"
