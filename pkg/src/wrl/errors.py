"""Exception types shared across modules."""


class NumericalGuardError(RuntimeError):
    """A numerical sanity guard tripped (CLI exit status 2)."""


class DegenerateImmersionError(NumericalGuardError):
    """``|d_u Phi ^ d_v Phi|`` vanishes somewhere on the grid."""


class CurlDefectError(NumericalGuardError):
    """A potential is not path independent beyond discretization error."""

    def __init__(self, message, defects=None):
        super().__init__(message)
        self.defects = defects or {}
