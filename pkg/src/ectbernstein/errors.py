"""Exception and warning types raised by the construction routines."""


class BernsteinError(Exception):
    """Base class for all construction failures."""


class ConjugationViolation(BernsteinError, ValueError):
    pass


class DivisionByZero(BernsteinError, ZeroDivisionError):
    pass


class NotChebyshevAtEndpoints(BernsteinError):
    """A confluent collocation problem at {a, b} has no unique solution."""


class SingularExpansion(BernsteinError):
    pass


class PreconditionFailed(BernsteinError, ValueError):
    pass


class RatioOutOfRange(BernsteinError):
    """A node ratio gamma_k/beta_k falls outside [h(a), h(b)].

    The node for index ``k`` would have to leave the interval, which is
    exactly how a missing operator manifests itself.
    """

    def __init__(self, k, ratio, lower, upper):
        self.k = k
        self.ratio = ratio
        self.lower = lower
        self.upper = upper
        super().__init__(
            f"ratio {ratio!r} for k={k} outside [{lower!r}, {upper!r}]"
        )


class Infeasible(BernsteinError):
    def __init__(self, report):
        self.report = report
        ks = [v[0] for v in report.violations]
        msg = "no Bernstein operator fixes f0 and f1"
        if not report.beta_positive:
            msg += "; some beta_k <= 0"
        if ks:
            msg += f"; ratio bound violated at k={ks}"
        super().__init__(msg)


class NotInSpectrum(BernsteinError, ValueError):
    pass


class RankDeficiency(BernsteinError):
    pass


class DegenerateDenominator(BernsteinError):
    pass


class OutOfRange(BernsteinError, ValueError):
    pass


class IllConditioned(UserWarning):
    pass


class DegreeWarning(UserWarning):
    pass


class NumericalMismatch(BernsteinError):
    """Two routes to the same quantity disagree beyond tolerance."""
