"""Exception and warning types shared across the package."""


class QdCascadeError(Exception):
    """Base class for all package errors."""


class InvalidField(QdCascadeError):
    """A configuration field violates an invariant.

    Carries the dotted field path (e.g. ``cavity.hbar_kappa``) and a
    human-readable reason.
    """

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class GridMismatch(QdCascadeError):
    """A trajectory or field does not live on the requested grid."""


class ZeroEmission(QdCascadeError):
    """A metric denominator vanished; the channel emitted no photons."""


class OutOfRange(QdCascadeError):
    """A bounded metric left [0, 1] by more than the numerical slack."""


class StepUnstable(QdCascadeError):
    """A propagated density matrix developed a significantly negative
    eigenvalue; the step size is too large for the given rates."""


class DegenerateRidge(QdCascadeError):
    """A sweep row has its maximum on the grid boundary; no interior
    ridge point can be extracted from it."""


class CorruptCheckpoint(QdCascadeError):
    """A sweep checkpoint does not match its spec or is unreadable.

    ``record_index`` points at the offending record, or -1 when the header
    itself is corrupt.
    """

    def __init__(self, message: str, record_index: int = -1):
        self.record_index = record_index
        super().__init__(message)


class TailWarning(UserWarning):
    """Excited population remaining at t_end exceeds the truncation budget;
    time-integrated metrics carry an unquantified tail error."""
