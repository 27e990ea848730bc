"""Exception types shared across the package.

The CLI maps these onto its exit-code taxonomy, so new error conditions
should reuse one of the classes below rather than raising bare exceptions.
"""


class ConfigError(ValueError):
    """Invalid run configuration (bad key, malformed value, violated constraint)."""


class NonInformativeTimeError(ValueError):
    """Probe readout requested at a time where the signal carries no information."""


class IntegrationError(RuntimeError):
    """Master-equation integration produced an invalid state (trace drift, NaN)."""


class ConvergenceError(RuntimeError):
    """An iterative procedure did not converge (steady state, Fock cutoff)."""


class CalibrationError(RuntimeError):
    """Steady-state calibration failed its linearity cross-check."""
