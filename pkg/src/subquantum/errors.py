"""Exception types raised across the package."""


class SubquantumError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateDensity(SubquantumError, ArithmeticError):
    """Total density fell below the configured floor; the velocity is undefined there."""

    def __init__(self, message, positions=None):
        super().__init__(message)
        self.positions = positions


class QuadratureUnresolved(SubquantumError, ArithmeticError):
    """Node doubling did not bring the quadrature error estimate under tolerance."""


class UndefinedSplit(SubquantumError, ValueError):
    """The modular splitting needs a nonzero phase term (x != 0 and t != 0)."""


class UnsupportedConfiguration(SubquantumError, ValueError):
    """Configuration outside the range a formula was derived for."""


class StabilityViolation(SubquantumError, ArithmeticError):
    """Explicit diffusion step would exceed the r <= 1/2 stability bound."""


class DomainTooSmall(SubquantumError, ValueError):
    """Lattice does not cover the initial packet with enough margin."""


class ConfigError(SubquantumError):
    """Base for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, lineno, token, reason="cannot parse"):
        super().__init__(f"line {lineno}: {reason}: {token!r}")
        self.lineno = lineno
        self.token = token


class ValidationError(ConfigError, ValueError):
    """A configuration value violates an invariant."""
