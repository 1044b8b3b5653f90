"""Exception hierarchy shared across the toolkit."""


class CdFilterError(Exception):
    """Base class for all errors raised by this package."""


class RecoverableRhsError(CdFilterError):
    """An ODE right-hand side failed in a way that permits retrying with a
    smaller step (the adaptive solver rejects and halves)."""


class NotSymmetric(CdFilterError):
    """Input matrix is not symmetric within tolerance."""


class NotPositiveSemiDefinite(CdFilterError):
    """Input matrix has a significantly negative pivot."""


class SingularFactor(RecoverableRhsError):
    """A square factor is numerically singular; linear solves against it
    cannot proceed.  Recoverable inside an adaptive integration."""


class MaxStepsExceeded(CdFilterError):
    """The ODE solver exhausted its step budget."""


class StepUnderflow(CdFilterError):
    """The adaptive step size collapsed below resolvable size."""


class MissingDerivatives(CdFilterError):
    """An operation requires analytic drift derivatives that the model does
    not provide (and finite differences are disabled)."""


class DegenerateInnovationCovariance(CdFilterError):
    """The innovation covariance factor has a zero diagonal entry; the gain
    solve is ill-posed."""


class AtStationSingularity(CdFilterError):
    """Target is directly above the radar station; azimuth is undefined."""


class AllTrialsDivergent(CdFilterError):
    """RMSE requested but every trial diverged."""
