"""Exception hierarchy for the package.

Every failure is either an input/validation problem (bad files, bad
config, degenerate data) or a numerical failure inside the math. The
split drives CLI exit codes and the service's HTTP error mapping.
"""


class BondoptError(Exception):
    kind = "error"


class InputError(BondoptError):
    """Invalid input data or configuration."""

    kind = "validation"


class NumericalError(BondoptError):
    """A numerical procedure failed or refused to proceed."""

    kind = "numerical"


# ---- series / rational function layer ----

class PoleOnWrongSide(NumericalError):
    """Requested one-sided expansion, but a pole sits on the wrong side."""


class ConvergenceFailure(NumericalError):
    """Polynomial root finding did not reproduce the polynomial."""


# ---- correlation fitting ----

class InsufficientData(InputError):
    """Too few dates or maturities for the requested estimate."""


class DegenerateMaturity(InputError):
    """A maturity has zero return variance."""


class SingularSystem(NumericalError):
    """Rational interpolation system is rank-deficient."""


class UnstableFit(NumericalError):
    """Fitted denominator has a root in the unit-circle guard band."""


# ---- spectral symbol / factorization ----

class PoleOnCircle(NumericalError):
    """Correlation generating function has a pole on the unit circle."""


class NotNormalized(InputError):
    """Correlation generating function does not have C(0) = 1."""


class RootOnCircle(NumericalError):
    """Symbol has a zero or pole inside the unit-circle guard band."""


class NonPositiveSymbol(NumericalError):
    """Symbol is not strictly positive on the unit circle."""


class SingularMatrix(NumericalError):
    """Dense Toeplitz system is singular or numerically near-singular."""


# ---- portfolio construction ----

class NonPositiveVariance(InputError):
    """Variance estimates must be strictly positive."""


class ZeroNetPosition(NumericalError):
    """Cannot rescale to sum one: raw holdings sum to zero."""


# ---- market data ----

class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonMonotoneTenors(InputError):
    """Tenors must be positive and strictly increasing."""


class DuplicateDate(InputError):
    """The same observation appears twice."""


class EmptyInput(InputError):
    """No data rows found."""


class GridOutOfRange(InputError):
    """Requested maturity falls outside the quoted tenor range."""


class InsufficientDates(InputError):
    """Need at least two curve dates to form returns."""


class WindowTooShort(InputError):
    """Backtest window does not fit into the available history."""


# ---- orchestration ----

class PipelineError(BondoptError):
    """Wraps a module error with the pipeline stage that raised it."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}': {cause}")

    @property
    def kind(self):  # type: ignore[override]
        if isinstance(self.cause, BondoptError):
            return self.cause.kind
        return "numerical"
