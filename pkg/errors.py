"""
Exceptions raised by the pdlab numerical modules
"""

from typing import Any, Optional


class PeriodLabError(Exception):
    """Base class for every pdlab failure"""


class DomainSpecError(PeriodLabError):
    """Invalid weight / Hodge numbers"""


class NotInPeriodDomain(PeriodLabError):
    """A filtration fails the Hodge-Riemann relations"""

    def __init__(self, message: str, report: Optional[Any] = None):
        super().__init__(message)
        self.report = report


class DecompositionError(NotInPeriodDomain):
    """F^p ∩ conj(F^q) has the wrong dimension"""


class NotInLieAlgebra(PeriodLabError):
    """Matrix is not an infinitesimal isometry of Q"""


class UnknownSubspace(PeriodLabError):
    pass


class CartanError(PeriodLabError):
    """Centralizer iteration did not produce a Cartan subalgebra"""


class RootClusterError(PeriodLabError):
    """Eigenvalue clusters are ambiguous at the configured tolerance"""

    def __init__(self, message: str, gap_stats: Optional[dict] = None):
        super().__init__(message)
        self.gap_stats = gap_stats or {}


class ConjugationFlagError(PeriodLabError):
    """tau0 behaviour of a root vector contradicts its compact/noncompact flag"""


class FrameMaximalityError(PeriodLabError):
    """The abelian frame is not maximal in p0"""

    def __init__(self, message: str, enlargement: Optional[Any] = None):
        super().__init__(message)
        self.enlargement = enlargement


class IndeterminateMembership(PeriodLabError):
    """A leading block minor sits inside the borderline band"""

    def __init__(self, message: str, min_minor: float = 0.0):
        super().__init__(message)
        self.min_minor = min_minor


class NotInBigCell(PeriodLabError):
    pass


class SubspaceError(PeriodLabError):
    """Projection target is not an admissible subspace of n_plus"""


class NotInCompactGroup(PeriodLabError):
    pass


class PolarNonConvergence(PeriodLabError):
    pass


class RestrictedSpectrumError(PeriodLabError):
    pass


class FamilyError(PeriodLabError):
    """No commuting horizontal frame of the requested size"""
