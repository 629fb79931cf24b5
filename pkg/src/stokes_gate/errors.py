"""Exception hierarchy shared by every stage of the pipeline."""


class StokesGateError(Exception):
    """Base class for all library errors."""

    #: process exit code used by the command line front end
    exit_code = 1


class OperatorSyntaxError(StokesGateError, ValueError):
    """Malformed operator text. ``offset`` is the byte offset of the problem."""

    exit_code = 1

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class ZeroLeadingCoefficient(StokesGateError, ValueError):
    exit_code = 1


class NonLaurentQuotient(StokesGateError, ValueError):
    """a_i / a_n is not a Laurent polynomial, so no holomorphic system form exists."""

    exit_code = 2


class UnsupportedOperator(StokesGateError):
    """The operator falls outside the exactly-solvable class; we refuse to approximate."""

    exit_code = 2

    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)


class BranchAmbiguity(StokesGateError, ValueError):
    exit_code = 1


class DomainError(StokesGateError, ValueError):
    exit_code = 1


class CertificationFailure(StokesGateError):
    exit_code = 2


class PreconditionError(StokesGateError, ValueError):
    exit_code = 1


class RegionOutsideSector(StokesGateError, ValueError):
    exit_code = 3


class NoIrregularityWitness(StokesGateError):
    exit_code = 4


class StepSizeUnderflow(StokesGateError):
    """Adaptive stepping collapsed; ``rho_reached`` is the deepest radius reached."""

    exit_code = 5

    def __init__(self, message, rho_reached):
        self.rho_reached = rho_reached
        super().__init__(f"{message} (deepest rho reached: {rho_reached})")


class PrecisionExhausted(StokesGateError):
    exit_code = 5
