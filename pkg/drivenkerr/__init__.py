"""
drivenkerr - Drive-engineered Kerr nonlinearities of cavities coupled to a transmon

A driven transmon ancilla mediates an effective nonlinearity on the cavities it couples to.
The drive power and detuning tune the cavity self-Kerr and cross-Kerr, and the right drive
cancels the self-Kerr entirely.

This package provides:
- Rotating-frame Hamiltonians of the driven transmon and the coupled cavities
- Adiabatically labeled driven-transmon and dressed eigenstates
- Weak-coupling perturbative self- and cross-Kerr with multiphoton resonance detection
- Closed-form regime formulas (weak drive, two-level, semiclassical, near resonance)
- Exact diagonalization and normal-ordered extraction of K, beta and sigma
- Cat-state fidelity, Wigner functions, Lindblad decay and rate budgets
- A config-driven command line producing CSV/JSON datasets
"""

__version__ = "0.1.0"
__author__ = "drivenkerr developers"
__license__ = "MIT"

from .config import DEFAULTS, TOLERANCES
from .errors import (
    ConfigError, ConvergenceError, DomainError, DrivenKerrError, LabelingError,
    NumericalError, RegimeWarning, ResonanceError, TruncationError,
)
from .model import SystemParams, coupled_hamiltonian, driven_transmon_hamiltonian, with_drive_power
from .floquet import FloquetSolution, solve_adiabatic
from .perturbation import cross_kerr, kerr_report, self_kerr, zero_drive_kerr
from .dressing import DressedSpectrum, NonlinearExpansion, diagonalize_labeled, extract_expansion
from .dynamics import (
    QuantumState, DensityOperator, RateBudget, coherent_fidelity, make_cat, rate_budget, wigner,
)
