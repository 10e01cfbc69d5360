"""Exception hierarchy for the gammafde package.

Two broad classes matter for the CLI exit codes: ``ValidationError``
(bad input, exit code 2) and ``NumericalError`` (a computation could
not be carried out at the requested accuracy, exit code 3).
"""


class GammaFdeError(Exception):
    """Base class for all package errors."""


class ValidationError(GammaFdeError):
    """Input or hypothesis validation failed."""


class NumericalError(GammaFdeError):
    """A numerical procedure failed or lost accuracy."""


# --- special functions ---------------------------------------------------

class PoleProximity(NumericalError):
    """Argument too close to a pole of Gamma/digamma/polygamma."""


class ZeroBase(ValidationError):
    """Zero base in a complex power."""


class OutOfRange(ValidationError):
    """Scalar argument outside its documented range."""


class NonConvergence(NumericalError):
    """A series or iteration failed to converge within its budget."""


# --- coefficient / homogeneous -------------------------------------------

class InvalidHypotheses(ValidationError):
    """The coefficient spec fails its structural hypotheses."""


class TruncationTooSmall(NumericalError):
    """Requested tolerance unreachable at the given truncation depth."""


class RegionViolation(NumericalError):
    """Evaluation point violates the analyticity-region clauses."""


class IncompatibleParams(ValidationError):
    """Component solutions disagree on shared equation parameters."""


class SummabilityFailure(ValidationError):
    """A required series of reciprocal squares does not converge."""


# --- particular solution --------------------------------------------------

class BadContour(ValidationError):
    """Contour specification violates its invariants."""


class KernelInvalid(ValidationError):
    """Kernel fails a hard requirement (e.g. vanishes at the origin)."""


class DecayViolation(NumericalError):
    """Integrand has not decayed below tolerance at the ray ends."""


# --- factorization --------------------------------------------------------

class InvalidSpec(ValidationError):
    """Trigonometric coefficient spec violates its invariants."""


class ExcludedAngle(ValidationError):
    """Shift angle excluded by the factorization formulas."""


class BracketFailure(NumericalError):
    """A zero bracket could not be refined."""


class UnknownClass(ValidationError):
    """Unknown problem class requested from the kernel catalog."""


# --- transmission ----------------------------------------------------------

class DegenerateCoefficients(ValidationError):
    """Degenerate transmission coefficients (jump coefficient = 1)."""


class DenominatorZero(NumericalError):
    """Closed-form denominator vanished at the evaluation point."""


class InvalidWeight(ValidationError):
    """Weight parameter outside its admissible window."""


class InsufficientZeros(ValidationError):
    """Zero table too short for the fixed index ranges."""


class WindowViolation(ValidationError):
    """Transform variable outside its admissible window."""


class BudgetExceeded(ValidationError):
    """Quadrature budget too large or missing."""


# --- cli --------------------------------------------------------------------

class ParseError(ValidationError):
    """Input file could not be parsed."""
