"""Exception types raised across the package."""


class CngaussError(Exception):
    """Base class for all package-specific failures."""


class NotPositiveDefinite(CngaussError):
    """A matrix required to be symmetric positive definite failed factorization."""


class NonFiniteObjective(CngaussError):
    """The optimizer was handed a starting point with a non-finite objective."""


class InvalidSupport(CngaussError, ValueError):
    """A value lies outside the support of the dichotomous weight law."""


class DegenerateScatter(CngaussError):
    """A weighted scatter matrix collapsed and cannot serve as a scale estimate."""


class InvalidRank(CngaussError, ValueError):
    """Requested number of latent factors is outside 1 <= q < p."""


class SingularR(CngaussError):
    """The q x q matrix in the loading update failed factorization."""


class EmptyComponent(CngaussError):
    """A mixture component lost the minimum mass needed to update its parameters."""


class InvalidNesting(CngaussError, ValueError):
    """The alternative model's log-likelihood fell below the null's beyond tolerance."""


class AllCandidatesFailed(CngaussError):
    """Every (G, q) candidate in a grid search raised a fitting error."""


class ParseError(CngaussError):
    """A CSV cell could not be parsed; the message names the row and column."""


class NonNumericColumn(CngaussError):
    """A CSV column holds no numeric data and was not declared as the label column."""


class SchemaMismatch(CngaussError):
    """A model document is corrupted or carries an unsupported schema version."""


class DimensionUnsupported(CngaussError, ValueError):
    """Contour grids are only defined for bivariate data."""
