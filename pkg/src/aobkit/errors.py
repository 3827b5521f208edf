"""Exception hierarchy shared by all aobkit modules."""


class AobkitError(Exception):
    """Base class for every error raised by this package."""


class BoundaryEvaluationAtSingularity(AobkitError):
    """Evaluation requested at a singular atom, jump knot or declared accumulation point."""


class NotInner(AobkitError):
    """The symbol has a nontrivial outer factor or a non-unimodular constant."""


class NotMeromorphicInner(AobkitError):
    """The symbol is not a finite Blaschke product times e^{iaz}."""


class UnsupportedSymbol(AobkitError):
    """The symbol lies outside the quadrature domain of this operation (singular atoms)."""


class PoleCollision(AobkitError):
    """Kernel evaluated at the conjugate of a real frequency with nonzero numerator."""


class NotAdmissible(AobkitError):
    """Frequency point fails the admissibility gate (|b| = 1 interior, or S_2 = inf boundary)."""


class QuadratureNotConverged(AobkitError):
    """Adaptive quadrature hit its node cap before reaching the requested tolerance."""


class NotHermitian(AobkitError):
    """Matrix departs from Hermitian symmetry beyond tolerance."""


class NotPSD(AobkitError):
    """Matrix has an eigenvalue below the PSD tolerance."""


class DegenerateHead(AobkitError):
    """Head vectors are numerically dependent; the complement is ill-defined."""


class SingularGram(AobkitError):
    """Gram matrix is numerically singular."""


class DimensionMismatch(AobkitError):
    """Vector families do not live in a common ambient space."""


class WeightVanishesOnSegment(AobkitError):
    """w_p = 0 somewhere on the integration segment."""


class SpectrumOnSegment(AobkitError):
    """The real segment touches the spectrum of the inner function."""


class GammaOutOfRange(AobkitError):
    """Exponent gamma must exceed 1/3."""


class DuplicateFrequency(AobkitError):
    """Coincident frequencies would make the Gram singular by construction."""


class BoundaryFrequency(AobkitError):
    """A real frequency degenerates the pseudo-hyperbolic product."""


class ZeroFrequency(AobkitError):
    """A zero frequency makes the ratio test undefined."""


class DivisorModulusOne(AobkitError):
    """|b2(lambda_n)| = 1: the ratio R is undefined at this point."""


class ConfigInvalid(AobkitError):
    """Scenario configuration failed validation."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class AnalysisFailed(AobkitError):
    """An analysis raised; the original module error is chained."""
