"""Exception types shared across the solver stack."""


class NetCournotError(Exception):
    """Base class for all solver errors."""


class TaxDegenerateError(NetCournotError):
    """The tax rate is numerically indistinguishable from 1 (1/(1-t) pole)."""


class NoConvergenceError(NetCournotError):
    """An iterative solver exhausted its iteration budget or diverged."""


class NonInteriorError(NetCournotError):
    """An operation that requires an interior equilibrium got a flagged one."""

    def __init__(self, message: str, binding: str | None = None):
        super().__init__(message)
        self.binding = binding


class BoundaryError(NetCournotError):
    """A finite-difference stencil left the interior feasibility region."""


class SocViolationError(NetCournotError):
    """A best-response formula was evaluated where its SOC denominator is <= 0."""


class NoInteriorPointError(NetCournotError):
    """The entire policy search box is infeasible."""


class NeverFeasibleError(NetCournotError):
    """Feasibility fails already at the bottom of the sweep range."""


class ConfigError(NetCournotError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    """Malformed or unknown key in a config file or flag set."""


class ValidationError(ConfigError):
    """A config value is outside its admissible range."""
