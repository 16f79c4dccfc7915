class IwalgError(Exception):
    """Base class for domain errors; ``name`` is what the CLI reports."""

    @property
    def name(self):
        return type(self).__name__


class NotAUnit(IwalgError):
    pass


class PrecisionExhausted(IwalgError):
    pass


class HypothesisFailed(IwalgError):
    pass


class Indeterminate(IwalgError):
    pass


class DenominatorNotCleared(IwalgError):
    pass


class IntegralityViolation(IwalgError):
    pass


class NotOrdinary(IwalgError):
    pass


class InconsistentFlags(IwalgError):
    pass


class DaggerVanishes(IwalgError):
    pass


class NotDivisibleBy12(IwalgError):
    pass


class CharTooSmall(IwalgError):
    pass


class SearchExhausted(IwalgError):
    pass
