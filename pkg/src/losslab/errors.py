"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, TraceError -> 2,
ConvergenceError -> 3.
"""


class LosslabError(Exception):
    """Base class for all package errors."""


class ConfigError(LosslabError):
    """Invalid or incomplete run configuration / scenario file."""


class TraceError(LosslabError):
    """Malformed trace file or trace that violates a channel invariant."""


class PhaseAlignError(TraceError):
    """Vane signal unusable for phase alignment (flat or too noisy)."""


class NoDischargeEvent(TraceError):
    """Valve lift never crosses the detection threshold."""


class ConvergenceError(LosslabError):
    """Iterative density scheme failed to converge.

    Carries the worst relative residual seen and the march step index
    at which the iteration cap was hit.
    """

    def __init__(self, message, worst_residual=None, step_index=None):
        super().__init__(message)
        self.worst_residual = worst_residual
        self.step_index = step_index
