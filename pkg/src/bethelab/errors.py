"""Exception types shared across the package."""


class CapacityError(RuntimeError):
    """Requested Hilbert space exceeds the configured memory bound."""


class DimensionMismatchError(ValueError):
    """Operands live on different bases or auxiliary dimensions."""


class PoleError(ValueError):
    """Spectral parameters hit (or came too close to) a pole."""


class SectorError(ValueError):
    """Requested occupation sector is not safely representable."""


class CollisionError(ValueError):
    """Bethe parameters collided during iteration."""


class SingularJacobianError(RuntimeError):
    """Newton step failed because the Jacobian is numerically singular."""


class StructureError(RuntimeError):
    """An exact structural identity (leading coefficient, parity) failed."""
