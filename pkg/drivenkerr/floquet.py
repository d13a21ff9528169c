"""
Driven transmon in the rotating frame of the drive.

Eigenstates psi_m are labeled by adiabatic continuation from the Fock states |m> of the
undriven transmon: the drive amplitude is ramped in steps and each eigenvector is matched
to the previous step's labeled state of maximum overlap.
"""

import logging
from dataclasses import dataclass
from typing import FrozenSet, Optional

import numpy as np
import pandas as pd
from scipy.optimize import linear_sum_assignment

from .algebra import eigh, ladder
from .config import DEFAULTS, TOLERANCES
from .errors import InvalidDimensionError, LabelingError
from .model import SystemParams, driven_transmon_hamiltonian
from .utils import gauge_fix

logger = logging.getLogger("drivenkerr.floquet")


@dataclass(frozen=True)
class FloquetSolution:
    """
    Quasienergies, adiabatically labeled states and ladder matrix elements.

    Arrays are indexed by the adiabatic label m. ``labels[k]`` is the label of the
    k-th eigenvalue in ascending order.
    """

    quasienergies: np.ndarray
    states: np.ndarray
    c_minus: np.ndarray
    c_plus: np.ndarray
    labels: np.ndarray

    @property
    def n_levels(self) -> int:
        return len(self.quasienergies)

    @property
    def untrusted(self) -> FrozenSet[int]:
        """The two highest truncated levels are unreliable."""
        return untrusted_labels(self)

    def eps(self, m: int, n: int) -> float:
        """Quasienergy difference eps_mn = eps_m - eps_n."""
        return float(self.quasienergies[m] - self.quasienergies[n])


def untrusted_labels(sol: FloquetSolution) -> FrozenSet[int]:
    n = sol.n_levels
    return frozenset({n - 2, n - 1})


def _assign(previous: np.ndarray, vectors: np.ndarray, step: int, skip=frozenset()) -> np.ndarray:
    """Match eigenvectors to previously labeled states; returns eigen-index per label."""
    overlaps = np.abs(previous.conj().T @ vectors) ** 2
    rows, cols = linear_sum_assignment(-overlaps)
    order = np.empty(len(rows), dtype=int)
    order[rows] = cols
    gap_tol = TOLERANCES['LABEL_GAP']
    for label in range(overlaps.shape[0]):
        if label in skip:
            continue
        row = overlaps[label]
        ranked = np.argsort(row)[::-1]
        best, second = row[ranked[0]], row[ranked[1]]
        if best - second < gap_tol:
            raise LabelingError(step, (int(ranked[0]), int(ranked[1])), float(best - second),
                                hint=f"label {label}; increase ramp_steps or move off resonance")
    return order


def solve_adiabatic(p: SystemParams, ramp_steps: int = DEFAULTS['RAMP_STEPS'],
                    extra_diagonal: Optional[np.ndarray] = None) -> FloquetSolution:
    """
    Solve the driven transmon and label its eigenstates adiabatically.

    Args:
        p: System parameters
        ramp_steps: Number of linear amplitude steps from zero to Omega_d
        extra_diagonal: Optional level shifts added before diagonalizing

    Returns:
        FloquetSolution for the final drive amplitude

    Raises:
        LabelingError: When two overlaps at some step are within the labeling gap
    """
    if ramp_steps < 1:
        raise InvalidDimensionError(f"ramp_steps must be >= 1, got {ramp_steps}")
    n = p.n_transmon
    c, _ = ladder(n)

    if p.omega_d == 0:
        # Fock states are exact at zero drive
        H = driven_transmon_hamiltonian(p, extra_diagonal)
        eps = np.real(np.diag(H)).copy()
        states = np.eye(n, dtype=complex)
    else:
        logger.debug(f"Ramping drive to {p.omega_d} in {ramp_steps} steps")
        states = np.eye(n, dtype=complex)
        skip = frozenset({n - 2, n - 1})
        eps = None
        for k in range(1, ramp_steps + 1):
            amplitude = p.omega_d * k / ramp_steps
            system = eigh(driven_transmon_hamiltonian(p, extra_diagonal, omega_d=amplitude))
            order = _assign(states, system.vectors, k, skip)
            states = system.vectors[:, order]
            eps = system.values[order]
        states = gauge_fix(states)

    labels = np.argsort(eps, kind="stable")
    c_minus = states.conj().T @ c @ states
    return FloquetSolution(
        quasienergies=np.asarray(eps, dtype=float),
        states=states,
        c_minus=c_minus,
        c_plus=c_minus.conj().T,
        labels=labels,
    )


def stark_shifted_transition(sol: FloquetSolution, p: SystemParams, n: int, m: int) -> float:
    """
    Stark-shifted transition frequency n <- m relative to (n - m) omega_10.

    Returns (n - m) delta_d + eps_n - eps_m in units of alpha.
    """
    for level in (n, m):
        if not 0 <= level < sol.n_levels:
            raise InvalidDimensionError(f"level {level} outside truncation {sol.n_levels}")
    return (n - m) * p.delta_d + sol.eps(n, m)


def floquet_table(sol: FloquetSolution) -> pd.DataFrame:
    """Quasienergies and c^(-1)_mn matrix elements as a flat table."""
    n = sol.n_levels
    m_idx, n_idx = np.meshgrid(np.arange(n), np.arange(n), indexing='ij')
    return pd.DataFrame({
        'm': m_idx.ravel(),
        'n': n_idx.ravel(),
        'eps_m': sol.quasienergies[m_idx.ravel()],
        're': sol.c_minus.real.ravel(),
        'im': sol.c_minus.imag.ravel(),
    })
