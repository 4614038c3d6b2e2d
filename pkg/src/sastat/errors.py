"""Exception types shared across the package.

Each class carries a short ``module`` tag naming the subsystem that raised
it; the CLI prefixes error messages with this tag.
"""


class SaStatError(Exception):
    """Base class for every error this package raises deliberately."""

    module = "sastat"


class DataError(SaStatError):
    """Invalid user-supplied data: malformed files, bad values, bad shapes."""

    module = "model"


class OrderFormatError(DataError):
    """A merge-order file violates the SAORDER format or id convention."""

    module = "model"


class ZeroVarianceError(SaStatError):
    """A statistic is undefined because the feature is constant."""

    module = "stats"


class CoincidentPointsError(SaStatError):
    """Duplicate coordinates are not representable under inverse-distance weights."""

    module = "baselines"


class MatrixCapError(SaStatError):
    """A distance-matrix linkage was requested above the configured point cap."""

    module = "linkage"


class FitError(SaStatError):
    """Nonlinear fit failed: unidentifiable data or no convergence."""

    module = "fitting"
