"""
Exception hierarchy for drivenkerr.

Every error carries the process exit code the command line front end returns for it.
"""

from .config import EXIT_CODES


class DrivenKerrError(Exception):
    """Base class for all drivenkerr errors."""

    exit_code = EXIT_CODES['UNEXPECTED']


class ConfigError(DrivenKerrError):
    """Invalid or unparsable run configuration."""

    exit_code = EXIT_CODES['CONFIG']

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(DrivenKerrError):
    """A numerical procedure could not produce a trustworthy result."""

    exit_code = EXIT_CODES['NUMERICAL']


class InvalidDimensionError(NumericalError):
    """Operator dimensions are invalid or exceed the configured cap."""


class NonHermitianError(NumericalError):
    """Input to a Hermitian solver is not Hermitian within tolerance."""

    def __init__(self, asymmetry, scale):
        super().__init__(
            f"matrix is not Hermitian: max |H - H^dagger| = {asymmetry:.3e} "
            f"(scale {scale:.3e})"
        )
        self.asymmetry = asymmetry


class LabelingError(NumericalError):
    """Adiabatic state tracking met a near-degenerate overlap."""

    def __init__(self, step, pair, gap, hint=None):
        message = (
            f"ambiguous adiabatic labeling at ramp step {step}: "
            f"states {pair[0]} and {pair[1]} overlap within {gap:.2e}"
        )
        if hint:
            message = f"{message}; {hint}"
        super().__init__(message)
        self.step = step
        self.pair = pair
        self.gap = gap


class DomainError(NumericalError):
    """A closed-form expression was evaluated outside its domain."""


class TruncationError(NumericalError):
    """The requested state or observable does not fit the Hilbert-space truncation."""


class ConvergenceError(NumericalError):
    """An iterative search did not converge."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ResonanceError(DrivenKerrError):
    """Weak-coupling evaluation sits on a multiphoton resonance."""

    exit_code = EXIT_CODES['RESONANCE']


class RegimeWarning(UserWarning):
    """A closed-form regime formula is used outside its stated validity."""
