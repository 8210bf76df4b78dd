"""Exception types shared across the toolkit."""


class ConepackError(Exception):
    """Base class for all toolkit errors."""


class InvalidConstellationError(ConepackError):
    """The point set violates a structural invariant (size, dimension, duplicates)."""


class NotAdmissibleError(ConepackError):
    """An operation required a constellation inside the nonnegativity cone."""


class CatalogMissError(ConepackError, KeyError):
    """Unknown catalog id; the message lists the valid ids."""


class InfeasibleError(ConepackError):
    """A search or optimization could not produce a feasible point set."""


class ResourceCapError(ConepackError):
    """An enumeration or search exceeded its configured size cap."""


class BracketingError(ConepackError):
    """A root bracket for the required-SNR inversion could not be established."""
