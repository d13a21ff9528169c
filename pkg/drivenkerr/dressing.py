"""
Exact diagonalization of the driven transmon coupled to the cavities.

Dressed states |psi_m, N_a, N_b> are labeled by adiabatic continuation: the drive is ramped
first with the couplings off (transmon labels from the floquet solver, cavity Fock labels),
then the couplings are ramped to their final values while each eigenvector is matched to the
previous labeled state of maximum overlap.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import solve_triangular

from .algebra import eigh, product_labels
from .config import DEFAULTS
from .errors import LabelingError, TruncationError
from .floquet import FloquetSolution, _assign, solve_adiabatic
from .model import SystemParams, coupled_hamiltonian, coupled_hamiltonian_parts
from .perturbation import resonance_scan
from .utils import falling_factorial, gauge_fix

logger = logging.getLogger("drivenkerr.dressing")


@dataclass(frozen=True)
class DressedSpectrum:
    """
    Labeled eigen-energies E_m(N_a, N_b) of the coupled system.

    ``energies[m, N_a, N_b]`` and ``states[:, flat]`` are indexed by label, where
    ``flat`` is the product-basis index of (m, N_a, N_b).
    """

    params: SystemParams
    solution: FloquetSolution
    energies: np.ndarray
    states: np.ndarray

    @property
    def dims(self) -> Tuple[int, int, int]:
        return self.energies.shape

    def energy(self, m: int, n_a: int, n_b: int = 0) -> float:
        return float(self.energies[m, n_a, n_b])

    def uncoupled_energy(self, m: int, n_a: int, n_b: int = 0) -> float:
        """eps_m - delta_da N_a - delta_db N_b."""
        p = self.params
        return float(self.solution.quasienergies[m] - p.delta_da * n_a - p.delta_db * n_b)

    def shift(self, m: int, n_a: int, n_b: int = 0) -> float:
        """Coupling-induced shift E_m(N_a, N_b) - E_m^(g=0)(N_a, N_b)."""
        return self.energy(m, n_a, n_b) - self.uncoupled_energy(m, n_a, n_b)

    def is_trusted(self, m: int, n_a: int, n_b: int = 0) -> bool:
        """False for the top two transmon levels and the top Fock level of each cavity."""
        n_t, dim_a, dim_b = self.dims
        if m >= n_t - 2 or n_a >= dim_a - 1:
            return False
        return dim_b == 1 or n_b < dim_b - 1


@dataclass(frozen=True)
class NonlinearExpansion:
    """
    Normal-ordered cavity nonlinearities for transmon state m:

        E_m(N) - E_m^(g=0)(N) = offset + delta_omega N + K/2! N(N-1) + beta/3! N(N-1)(N-2)
                                + sigma/4! N(N-1)(N-2)(N-3)
    """

    m: int
    offset: float
    delta_omega: float
    kerr: float
    beta: float
    sigma: float
    max_order: int

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.offset, self.delta_omega, self.kerr, self.beta, self.sigma])

    def resum(self, n: int) -> float:
        """Re-sum the expansion at photon number n."""
        c = self.coefficients
        return float(sum(c[k] * falling_factorial(n, k) / falling_factorial(k, k)
                         for k in range(self.max_order + 1)))

    def to_dict(self) -> Dict[str, float]:
        return {
            'm': self.m, 'offset': self.offset, 'delta_omega': self.delta_omega,
            'kerr': self.kerr, 'beta': self.beta, 'sigma': self.sigma,
            'max_order': self.max_order,
        }


def _skip_labels(dims: Sequence[int]) -> frozenset:
    """Flat indices excluded from the ambiguity check (top two transmon levels)."""
    n_t = dims[0]
    return frozenset(i for i, label in enumerate(product_labels(dims)) if label[0] >= n_t - 2)


def _nearest_resonance_hint(sol: FloquetSolution, p: SystemParams) -> str:
    window = (p.delta_a - p.alpha, p.delta_a + p.alpha)
    hits = resonance_scan(sol, p.replace(g_a=0.0, g_b=0.0), window,
                          k_max=min(DEFAULTS['K_MAX'], sol.n_levels - 1))
    if not hits:
        return "no multiphoton resonance within 1 alpha of delta_a; increase ramp_steps"
    nearest = min(hits, key=lambda h: abs(h['location'] - p.delta_a))
    return (f"nearest resonance: condition {nearest['condition']} n={nearest['n']} "
            f"m={nearest['m']} j={nearest['j']:+d} at delta_a = {nearest['location']:.6g}")


def _ramp(start: np.ndarray, hamiltonian_at, steps: int,
          skip: frozenset) -> Tuple[np.ndarray, np.ndarray]:
    states = start
    energies = None
    for k in range(1, steps + 1):
        system = eigh(hamiltonian_at(k / steps))
        order = _assign(states, system.vectors, k, skip)
        states = system.vectors[:, order]
        energies = system.values[order]
    return energies, states


def diagonalize_labeled(p: SystemParams, ramp_steps: int = DEFAULTS['COUPLING_RAMP_STEPS'],
                        drive_ramp_steps: int = DEFAULTS['RAMP_STEPS'],
                        joint_ramp: bool = False,
                        sol: Optional[FloquetSolution] = None) -> DressedSpectrum:
    """
    Diagonalize the coupled Hamiltonian and label every eigenstate adiabatically.

    Args:
        p: System parameters
        ramp_steps: Steps of the coupling ramp (or of the joint ramp)
        drive_ramp_steps: Steps of the drive ramp for the transmon alone
        joint_ramp: Ramp drive and couplings together from the bare Fock basis instead
        sol: Precomputed transmon solution for ``p``

    Returns:
        DressedSpectrum

    Raises:
        LabelingError: On an ambiguous overlap, naming the nearest multiphoton resonance
    """
    dims = p.dims
    solution = sol if sol is not None else solve_adiabatic(p, drive_ramp_steps)
    skip = _skip_labels(dims)
    logger.info(f"Diagonalizing coupled system of dimension {p.dim} "
                f"({'joint' if joint_ramp else 'two-stage'} ramp)")

    try:
        if joint_ramp:
            def at(fraction: float) -> np.ndarray:
                return coupled_hamiltonian(p.replace(
                    omega_d=p.omega_d * fraction, g_a=p.g_a * fraction, g_b=p.g_b * fraction))
            energies, states = _ramp(np.eye(p.dim, dtype=complex), at, ramp_steps, skip)
        else:
            start = np.kron(solution.states, np.eye(dims[1] * dims[2], dtype=complex))
            if p.g_a == 0 and p.g_b == 0:
                energies = np.array([solution.quasienergies[m] - p.delta_da * na - p.delta_db * nb
                                     for m, na, nb in product_labels(dims)])
                states = start
            else:
                H0, V = coupled_hamiltonian_parts(p)
                energies, states = _ramp(start, lambda f: H0 + f * V, ramp_steps, skip)
    except LabelingError as e:
        raise LabelingError(e.step, e.pair, e.gap, hint=_nearest_resonance_hint(solution, p))

    return DressedSpectrum(
        params=p,
        solution=solution,
        energies=np.asarray(energies, dtype=float).reshape(dims),
        states=gauge_fix(states),
    )


def expansion_from_shifts(shifts: Sequence[float], m: int = 0,
                          max_order: int = DEFAULTS['MAX_ORDER']) -> NonlinearExpansion:
    """
    Solve the normal-ordered triangular system for the coefficients up to ``max_order``.

    Args:
        shifts: delta E(N) for N = 0..max_order (extra entries are ignored)
        m: Transmon label carried into the result
        max_order: Highest normal-ordered power, at most 4
    """
    if not 1 <= max_order <= 4:
        raise ValueError(f"max_order must be between 1 and 4, got {max_order}")
    shifts = np.asarray(shifts, dtype=float)
    if shifts.size < max_order + 1:
        raise TruncationError(
            f"need delta E(N) for N = 0..{max_order}, got {shifts.size} values")
    size = max_order + 1
    # :N^n:/n! evaluated on Fock state N
    matrix = np.array([[falling_factorial(N, n) / falling_factorial(n, n) for n in range(size)]
                       for N in range(size)])
    c = solve_triangular(matrix, shifts[:size], lower=True)
    c = np.concatenate([c, np.zeros(5 - size)])
    return NonlinearExpansion(m=m, offset=float(c[0]), delta_omega=float(c[1]), kerr=float(c[2]),
                              beta=float(c[3]), sigma=float(c[4]), max_order=max_order)


def extract_expansion(spec: DressedSpectrum, m: int,
                      max_order: int = DEFAULTS['MAX_ORDER']) -> NonlinearExpansion:
    """
    Cavity-a nonlinearities for transmon state m from the labeled spectrum (N_b = 0).

    Raises:
        TruncationError: If N_A = 0..max_order is not inside the trusted truncation
    """
    _, dim_a, _ = spec.dims
    if max_order > dim_a - 2:
        raise TruncationError(
            f"extracting order {max_order} needs n_a >= {max_order + 2}, got {dim_a}")
    if not spec.is_trusted(m, 0):
        raise TruncationError(f"transmon label {m} is at the top of the truncation")
    shifts = [spec.shift(m, n) for n in range(max_order + 1)]
    return expansion_from_shifts(shifts, m, max_order)


def cross_kerr_from_spectrum(spec: DressedSpectrum, m: int) -> float:
    """K_AB,m = E(1,1) - E(1,0) - E(0,1) + E(0,0)."""
    if spec.dims[2] < 3:
        raise TruncationError(f"cross-Kerr extraction needs n_b >= 3, got {spec.dims[2]}")
    if spec.dims[1] < 3:
        raise TruncationError(f"cross-Kerr extraction needs n_a >= 3, got {spec.dims[1]}")
    return (spec.energy(m, 1, 1) - spec.energy(m, 1, 0)
            - spec.energy(m, 0, 1) + spec.energy(m, 0, 0))


def spectrum_table(spec: DressedSpectrum) -> pd.DataFrame:
    """Flat (m, N_a, N_b, E, trusted) table in product order."""
    rows = [{'m': m, 'N_a': na, 'N_b': nb, 'E': spec.energy(m, na, nb),
             'trusted': spec.is_trusted(m, na, nb)}
            for m, na, nb in product_labels(spec.dims)]
    return pd.DataFrame(rows)


def kerr_scaling_probe(p: SystemParams, m: int, scale_factors: Sequence[float],
                       max_order: int = 3,
                       ramp_steps: int = DEFAULTS['COUPLING_RAMP_STEPS']) -> pd.DataFrame:
    """
    Extract K and beta at couplings scaled by each factor.

    The drive solution is shared across points. Ratios are taken to the first factor.
    """
    sol = solve_adiabatic(p)
    rows = []
    for factor in scale_factors:
        q = p.replace(g_a=p.g_a * factor, g_b=p.g_b * factor)
        spec = diagonalize_labeled(q, ramp_steps, sol=sol)
        exp = extract_expansion(spec, m, max_order)
        rows.append({'scale': float(factor), 'g_a_abs': abs(q.g_a),
                     'kerr': exp.kerr, 'beta': exp.beta})
    frame = pd.DataFrame(rows)
    if len(frame):
        ref = frame.iloc[0]
        frame['kerr_ratio'] = frame['kerr'] / ref['kerr'] if ref['kerr'] != 0 else np.nan
        frame['beta_ratio'] = frame['beta'] / ref['beta'] if ref['beta'] != 0 else np.nan
    return frame


def truncation_convergence(p: SystemParams, m: int, extra_levels: int = 4,
                           max_order: int = 2) -> Dict[str, float]:
    """Relative change of the extracted Kerr when the transmon truncation grows."""
    base = extract_expansion(diagonalize_labeled(p), m, max_order).kerr
    grown = p.replace(n_transmon=p.n_transmon + extra_levels)
    extended = extract_expansion(diagonalize_labeled(grown), m, max_order).kerr
    change = abs(extended - base) / abs(extended) if extended != 0 else abs(extended - base)
    logger.info(f"Truncation convergence for m={m}: relative change {change:.3g}")
    return {'kerr': base, 'kerr_extended': extended, 'relative_change': change,
            'n_transmon': p.n_transmon, 'n_transmon_extended': grown.n_transmon}
