"""Exception types raised across the package."""


class ChamberWalkError(Exception):
    """Base class; ``kind`` is the machine-readable tag used by the CLI."""

    kind = "error"


class StructuralError(ChamberWalkError, ValueError):
    kind = "structural"


class ContractError(ChamberWalkError, ValueError):
    kind = "contract"


class ValidationError(ChamberWalkError, ValueError):
    kind = "validation"


class NonSeparatingError(ChamberWalkError):
    kind = "non-separating"


class NonUniqueStationaryError(NonSeparatingError):
    kind = "non-unique-stationary"


class TooLargeError(ChamberWalkError):
    """An exact computation would exceed its size budget; use Monte Carlo."""

    kind = "too-large"


class SymmetryRefused(ChamberWalkError):
    kind = "symmetry-refused"
