"""Exception hierarchy.

Every error raised on bad user input derives from :class:`TsdistError`, which
the CLI maps to exit code 2.
"""


class TsdistError(Exception):
    """Base class for all input/usage errors raised by tsdist."""


# linalg
class NotSquare(TsdistError, ValueError):
    pass


class AsymmetryTooLarge(TsdistError, ValueError):
    pass


class NoConvergence(TsdistError, RuntimeError):
    pass


class NotPSD(TsdistError, ValueError):
    pass


class ShapeMismatch(TsdistError, ValueError):
    pass


class NonFiniteMatrix(TsdistError, ValueError):
    pass


# ingest
class DatasetIOError(TsdistError, OSError):
    pass


class ParseError(TsdistError, ValueError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc += ": "
        super().__init__(loc + message)


class EmptyDataset(TsdistError, ValueError):
    pass


class NonFiniteValue(ParseError):
    pass


class DegenerateRange(TsdistError, ValueError):
    pass


class NoValidWindow(TsdistError, ValueError):
    pass


class ResampleExhausted(TsdistError, RuntimeError):
    pass


class InvalidConfig(TsdistError, ValueError):
    pass


# gaussian / baselines / analysis
class DimensionMismatch(TsdistError, ValueError):
    pass


class TooFewSamples(TsdistError, ValueError):
    pass


class EmptyInput(TsdistError, ValueError):
    pass


class EmptyMatrix(TsdistError, ValueError):
    pass


class LengthMismatch(TsdistError, ValueError):
    pass


class DegenerateVariance(TsdistError, ValueError):
    pass


class InvalidMatrix(TsdistError, ValueError):
    pass


# layout
class TooFewNodes(TsdistError, ValueError):
    pass


class NonPositiveDistance(TsdistError, ValueError):
    pass


class LabelMismatch(TsdistError, ValueError):
    pass


# cli
class MetricNeedsRawData(TsdistError, ValueError):
    pass


class UnknownSourceLabel(TsdistError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class InsufficientOverlap(TsdistError, ValueError):
    pass
