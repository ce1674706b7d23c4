"""Exception hierarchy shared by all modules."""


class HystermError(Exception):
    """Base class for every error raised by hysterm."""


# grid / solver
class NonPositiveStep(HystermError, ValueError):
    pass


class HorizonExceedsOne(HystermError, ValueError):
    pass


class SolverFailure(HystermError, RuntimeError):
    pass


# relay
class PhaseContradiction(HystermError, ValueError):
    pass


class MissingBandChoice(HystermError, ValueError):
    pass


# free boundary construction
class NonTransversal(HystermError, ValueError):
    pass


class WindowOverlap(HystermError, ValueError):
    pass


class BoundaryPhaseChange(HystermError, ValueError):
    pass


class CurveOutsideWindow(HystermError, RuntimeError):
    pass


class NoSignChange(HystermError, RuntimeError):
    pass


class MultipleSignChanges(HystermError, RuntimeError):
    pass


class BranchCountMismatch(HystermError, ValueError):
    pass


class NotConverged(RuntimeWarning):
    """Picard iteration hit ``max_iter``; the result is still returned."""


# analysis
class DegenerateCurve(HystermError, ValueError):
    def __init__(self, message, constant=0.0):
        super().__init__(message)
        self.constant = constant


class HorizonTooShort(HystermError, ValueError):
    pass


class TransversalPreset(HystermError, ValueError):
    pass


# experiments
class UnknownPreset(HystermError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ParseError(HystermError, ValueError):
    pass


class ValidationError(HystermError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
