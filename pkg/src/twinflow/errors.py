"""Exception types raised across the simulator."""


class TwinflowError(Exception):
    pass


class ConfigError(TwinflowError, ValueError):
    """Base for configuration problems; ``violations`` lists every problem found."""

    def __init__(self, message, violations=None):
        super().__init__(message)
        self.violations = list(violations) if violations else [message]


class NegativeParameter(ConfigError):
    pass


class EmptyDistributionSet(ConfigError):
    pass


class ThresholdOutOfRange(ConfigError):
    pass


class ParseError(ConfigError):
    def __init__(self, message, line=None, column=None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")
        self.line = line
        self.column = column


class ZeroDistance(TwinflowError, ValueError):
    pass


class ZeroRateWhileConnected(TwinflowError, ValueError):
    pass


class ZeroAllocationWithWork(TwinflowError, ValueError):
    pass


class EmptyCandidateSet(TwinflowError, ValueError):
    pass


class AllZeroCounts(TwinflowError, ValueError):
    pass


class DimensionMismatch(TwinflowError, ValueError):
    pass


class NumericalBreakdown(TwinflowError, ArithmeticError):
    pass


class InfeasibleFixing(TwinflowError, ValueError):
    pass


class WrongSampleCount(TwinflowError, ValueError):
    pass


class IndexOutOfRange(TwinflowError, IndexError):
    pass


class EmptyBuffer(TwinflowError, LookupError):
    pass


class EmptyRun(TwinflowError, ValueError):
    pass
