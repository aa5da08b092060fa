"""Exception hierarchy shared by all pipeline stages."""


class PartialVarError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(PartialVarError):
    pass


class MissingColumn(PartialVarError):
    pass


class GapInYears(PartialVarError):
    pass


class TooFewObservations(PartialVarError):
    pass


class NoOverlap(PartialVarError):
    pass


class SelfOnly(PartialVarError):
    pass


class NonPositiveValue(PartialVarError):
    pass


class InsufficientSample(PartialVarError):
    pass


class RankDeficient(PartialVarError):
    pass


class NotPositiveDefinite(PartialVarError):
    pass


class NumericalError(PartialVarError):
    pass


class ZeroDiagonal(PartialVarError):
    pass


class HorizonMissing(PartialVarError):
    pass


class MissingMetric(PartialVarError):
    pass


class ExplosiveDGP(PartialVarError):
    pass


class NoEquilibrium(PartialVarError):
    pass
