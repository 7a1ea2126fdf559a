"""
Domain exceptions for the MAVAR analysis toolkit

Every error raised by the computational modules derives from MavarError so
callers (the CLI in particular) can map failures to exit codes in one place.
Argument problems also derive from ValueError.
"""

from typing import Optional


class MavarError(Exception):
    """Base class for all toolkit errors"""
    pass


class SeriesError(MavarError, ValueError):
    """Unreadable, malformed or otherwise unusable time series input"""
    pass


class GeneratorError(MavarError, ValueError):
    """Invalid generator spec or contaminant"""
    pass


class GridError(MavarError, ValueError):
    """Observation-interval grid or n value outside the admissible range"""
    pass


class QuadratureError(MavarError):
    """Numerical integration did not reach the requested tolerance"""

    def __init__(self, message: str, value: Optional[float] = None, abserr: Optional[float] = None):
        super().__init__(message)
        self.value = value
        self.abserr = abserr


class FitError(MavarError, ValueError):
    """Slope fit impossible on the supplied curve"""
    pass


class DegenerateSeriesError(FitError):
    """Input carries no fluctuation at all (constant series, zero curve)"""
    pass


class ExperimentError(MavarError, ValueError):
    """Invalid experiment configuration or cell"""
    pass
