"""
Cat-state dynamics in the Kerr-engineered cavity.

Covers coherent evolution on the labeled dressed spectrum, Wigner functions from the
displaced parity, Lindblad evolution under transmon decay, golden-rule rates and the
resulting infidelity budget, the Kerr-cancellation optimizer and Wigner-based fitting of
the cavity nonlinearities.

Times are internal (units of 1/alpha) unless a name ends in ``_us``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize, minimize_scalar
from scipy.special import gammaln, i0e, j0

from .algebra import embed, ladder, product_index
from .config import DEFAULTS, THRESHOLDS, TOLERANCES
from .dressing import DressedSpectrum, diagonalize_labeled, extract_expansion
from .errors import ConvergenceError, DomainError, NumericalError, TruncationError
from .floquet import FloquetSolution
from .model import SystemParams, with_drive_power
from .regimes import classical_amplitude
from .utils import internal_to_us, us_to_internal, warn_regime

logger = logging.getLogger("drivenkerr.dynamics")

FIT_PARAMETERS = ('delta_omega', 'kerr', 'beta')


@dataclass(frozen=True)
class QuantumState:
    """
    Pure state of cavity a over the labeled dressed states |psi_m, N_a, 0>.

    ``amplitudes[N]`` is the amplitude on |psi_m, N>; the transmon label m is fixed.
    """

    amplitudes: np.ndarray
    m: int = 0
    spectrum: Optional[DressedSpectrum] = None

    def __post_init__(self):
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > TOLERANCES['NORM']:
            raise NumericalError(f"state norm {norm:.12g} differs from 1")

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def mean_photon_number(self) -> float:
        return float(np.dot(np.arange(len(self.amplitudes)), self.weights))

    def dressed_vector(self) -> np.ndarray:
        """The state as a vector over the full labeled dressed basis."""
        if self.spectrum is None:
            raise ValueError("state is not attached to a dressed spectrum")
        dims = self.spectrum.dims
        vector = np.zeros(int(np.prod(dims)), dtype=complex)
        for n, amplitude in enumerate(self.amplitudes):
            vector[product_index((self.m, n, 0), dims)] = amplitude
        return vector


@dataclass
class DensityOperator:
    """Density matrix at time ``t`` over the labeled dressed basis (or a bare cavity)."""

    matrix: np.ndarray
    t: float = 0.0
    dims: Optional[tuple] = None

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def min_eigenvalue(self) -> float:
        hermitian = 0.5 * (self.matrix + self.matrix.conj().T)
        return float(np.linalg.eigvalsh(hermitian)[0])

    def check(self) -> None:
        """Raise NumericalError if the matrix is not a valid density operator."""
        asymmetry = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if asymmetry > TOLERANCES['HERMITICITY'] * max(1.0, float(np.max(np.abs(self.matrix)))):
            raise NumericalError(f"density matrix is not Hermitian (asymmetry {asymmetry:.3g})")
        if abs(self.trace - 1.0) > TOLERANCES['TRACE'] * max(1.0, abs(self.t)):
            raise NumericalError(f"density matrix trace {self.trace:.12g} differs from 1")
        if self.min_eigenvalue < TOLERANCES['POSITIVITY_WARN']:
            raise NumericalError(f"density matrix has eigenvalue {self.min_eigenvalue:.3g}")

    def cavity(self) -> np.ndarray:
        """Reduced density matrix of cavity a."""
        if self.dims is None:
            return self.matrix
        return cavity_density(self.matrix, self.dims)


@dataclass(frozen=True)
class RateBudget:
    """Golden-rule rates of the cat state under transmon decay (units of alpha)."""

    kappa_gamma: float
    escape: Dict[int, float]
    c_coeff: float
    n_bar: float
    gamma: float = 0.0

    @property
    def total_escape(self) -> float:
        return float(sum(self.escape.values()))

    @property
    def slope(self) -> float:
        """Early-time infidelity slope kappa_gamma <N> + C sum_m W_0m."""
        return self.kappa_gamma * self.n_bar + self.c_coeff * self.total_escape

    @property
    def purcell_share(self) -> float:
        if self.slope == 0:
            return 0.0
        return self.kappa_gamma * self.n_bar / self.slope

    def to_dict(self) -> Dict[str, object]:
        return {
            'gamma': self.gamma,
            'kappa_gamma': self.kappa_gamma,
            'escape': {str(m): w for m, w in self.escape.items()},
            'C_coeff': self.c_coeff,
            'n_bar': self.n_bar,
            'slope': self.slope,
            'purcell_share': self.purcell_share,
        }


# Cat states

def classical_displacement(p: SystemParams) -> complex:
    """
    Classical amplitude d_C of the driven transmon mode, d_C = Q0 / sqrt(2 lambda).

    The branch is the one continuous from d_C = 0 at zero drive; for weak drive
    d_C ~ Omega_d / delta_dc.
    """
    if abs(p.delta_dc) < TOLERANCES['DIVERGENCE']:
        raise DomainError(f"displacement needs delta_dc != 0, got {p.delta_dc:.3g}")
    if p.omega_d == 0:
        return 0j
    q0, _, lam = classical_amplitude(p)
    return q0 / math.sqrt(2.0 * lam) * complex(np.exp(1j * p.drive_phase))


def coherent_amplitudes(beta: complex, n: int) -> np.ndarray:
    """Fock amplitudes of the coherent state |beta> on N = 0..n-1 (not renormalized)."""
    N = np.arange(n)
    if beta == 0:
        amplitudes = np.zeros(n, dtype=complex)
        amplitudes[0] = 1.0
        return amplitudes
    log_amp = -0.5 * abs(beta) ** 2 + N * np.log(complex(beta)) - 0.5 * gammaln(N + 1)
    return np.exp(log_amp)


def cat_amplitudes(beta: complex, n: int) -> np.ndarray:
    """Normalized even cat (|beta> + |-beta>) / sqrt(2 + 2 exp(-2|beta|^2)) on n levels."""
    norm = 2.0 + 2.0 * math.exp(-2.0 * abs(beta) ** 2)
    amplitudes = (coherent_amplitudes(beta, n) + coherent_amplitudes(-beta, n)) / math.sqrt(norm)
    # Renormalize the truncated tail away
    return amplitudes / np.linalg.norm(amplitudes)


def make_cat(spec: DressedSpectrum, beta: complex, m: int = 0) -> QuantumState:
    """
    Even cat state over the dressed states |psi_m, N_a, 0>.

    Raises:
        TruncationError: If |beta|^2 exceeds a third of the cavity truncation
    """
    n_a = spec.dims[1]
    limit = THRESHOLDS['CAT_TRUNCATION_FRACTION'] * n_a
    if abs(beta) ** 2 > limit:
        raise TruncationError(f"|beta|^2 = {abs(beta) ** 2:.4g} exceeds {limit:.4g} "
                              f"for n_a = {n_a}")
    return QuantumState(cat_amplitudes(beta, n_a), m=m, spectrum=spec)


def mean_photon_number(beta: complex) -> float:
    """<N> = |beta|^2 tanh |beta|^2 of the even cat."""
    x = abs(beta) ** 2
    return x * math.tanh(x)


def phase_scrambling_time(kerr: float, beta: complex) -> float:
    """tau_ph = pi / (2 sqrt(<N>) |K|)."""
    if kerr == 0:
        return math.inf
    return math.pi / (2.0 * math.sqrt(mean_photon_number(beta)) * abs(kerr))


# Coherent fidelity

def _ladder_energies(source: Union[DressedSpectrum, Sequence[float]], m: int) -> np.ndarray:
    if isinstance(source, DressedSpectrum):
        return np.asarray(source.energies[m, :, 0], dtype=float)
    return np.asarray(source, dtype=float)


def _state_amplitudes(state: Union[QuantumState, np.ndarray]) -> np.ndarray:
    if isinstance(state, QuantumState):
        return np.asarray(state.amplitudes, dtype=complex)
    return np.asarray(state, dtype=complex)


def mean_frequency(energies: np.ndarray, n_bar: float) -> float:
    """omega_bar = E(ceil <N>) - E(ceil <N> - 1)."""
    n = max(1, math.ceil(n_bar - 1e-9))
    if n >= len(energies):
        raise TruncationError(f"<N> = {n_bar:.4g} is outside the {len(energies)}-level ladder")
    return float(energies[n] - energies[n - 1])


def _overlap(weights: np.ndarray, detuned: np.ndarray, t: np.ndarray) -> np.ndarray:
    phases = np.exp(-1j * np.outer(t, detuned))
    return np.abs(phases @ weights) ** 2


def coherent_fidelity(source: Union[DressedSpectrum, Sequence[float]],
                      state: Union[QuantumState, np.ndarray], t,
                      omega_bar: Optional[float] = None,
                      mode: str = 'ceiling') -> np.ndarray:
    """
    Fidelity F(t) = |<Psi_approx(t)|Psi(t)>|^2 of a cat evolving on a diagonal spectrum.

    Psi(t) acquires phases exp(-i E(N) t); Psi_approx(t) rotates rigidly at omega_bar.

    Args:
        source: Dressed spectrum, or the ladder energies E(N) directly
        state: Initial state (QuantumState or amplitudes over N)
        t: Scalar or array of internal times
        omega_bar: Rotation frequency; defaults to the discrete derivative at <N>
        mode: 'ceiling' for the discrete derivative, 'max_fidelity' to optimize omega_bar
            separately at each time

    Returns:
        Array of fidelities with the shape of ``t``
    """
    m = state.m if isinstance(state, QuantumState) else 0
    energies = _ladder_energies(source, m)
    amplitudes = _state_amplitudes(state)
    if len(amplitudes) > len(energies):
        raise TruncationError(f"state has {len(amplitudes)} levels, spectrum {len(energies)}")
    weights = np.abs(amplitudes) ** 2
    N = np.arange(len(weights))
    energies = energies[:len(weights)]
    n_bar = float(np.dot(N, weights))
    times = np.atleast_1d(np.asarray(t, dtype=float))

    if omega_bar is None:
        omega_bar = mean_frequency(energies, n_bar)
    if mode == 'ceiling':
        result = _overlap(weights, energies - N * omega_bar, times)
    elif mode == 'max_fidelity':
        n = max(1, math.ceil(n_bar - 1e-9))
        curvature = abs(energies[min(n + 1, len(energies) - 1)] - 2 * energies[n] + energies[n - 1])
        width = 2.0 * curvature * max(n_bar, 1.0) + 1e-12
        result = np.empty(len(times))
        for k, tk in enumerate(times):
            found = minimize_scalar(
                lambda w: -_overlap(weights, energies - N * w, np.array([tk]))[0],
                bounds=(omega_bar - width, omega_bar + width), method='bounded')
            result[k] = -found.fun
    else:
        raise ValueError(f"unknown omega_bar mode '{mode}'")
    result = np.clip(result, 0.0, 1.0)
    return result.reshape(np.shape(t)) if np.ndim(t) else result[0]


def fidelity_trajectory(spec: DressedSpectrum, state: QuantumState, times_us: Sequence[float],
                        mode: str = 'ceiling') -> pd.DataFrame:
    """Coherent fidelity on a grid of times in microseconds as a (t_us, F) table."""
    times_us = np.asarray(times_us, dtype=float)
    t = us_to_internal(times_us, spec.params.alpha_hz)
    return pd.DataFrame({'t_us': times_us, 'F': coherent_fidelity(spec, state, t, mode=mode)})


# Kerr cancellation

def cancellation_seed(p: SystemParams) -> float:
    """
    Closed-form drive power |Omega_d/delta_d|^2 at which 8 alpha |Omega_d|^2 / delta_d0^3 = 1.

    delta_d0 is measured from the cavity-shifted transmon frequency,
    delta_d0 = delta_d + |g_a|^2 / delta_a.
    """
    delta_d0 = p.delta_d + abs(p.g_a) ** 2 / p.delta_a if p.delta_a != 0 else p.delta_d
    if delta_d0 <= 0:
        raise DomainError(f"self-Kerr cancellation needs delta_d0 > 0, got {delta_d0:.4g}")
    omega_sq = delta_d0 ** 3 / (8.0 * p.alpha)
    return omega_sq / p.delta_d ** 2


def optimize_cancellation(p: SystemParams, drive_grid: Sequence[float],
                          delta_d: Optional[float] = None,
                          beta: complex = DEFAULTS['CAT_BETA'],
                          max_order: int = 3,
                          ramp_steps: int = DEFAULTS['COUPLING_RAMP_STEPS']) -> Dict[str, object]:
    """
    Drive power at which the cat sees no curvature: K_A0 + beta_A0 (<N> - 1) = 0.

    The condition is evaluated from the labeled full spectrum on ``drive_grid`` (values of
    |Omega_d/delta_d|^2) and refined by bracketed root finding on the first sign change.

    Returns:
        Dict with power_opt, omega_opt, K_at_opt, beta_at_opt, seed_power and the grid table

    Raises:
        ConvergenceError: If the target does not change sign on the grid
    """
    if delta_d is not None:
        p = p.replace(delta_d=delta_d)
    n_bar = mean_photon_number(beta)
    powers = np.sort(np.asarray(drive_grid, dtype=float))

    def expansion_at(power: float):
        spec = diagonalize_labeled(with_drive_power(p, power), ramp_steps=ramp_steps)
        return extract_expansion(spec, 0, max_order)

    def target(power: float) -> float:
        e = expansion_at(power)
        return e.kerr + e.beta * (n_bar - 1.0)

    rows = []
    for power in powers:
        e = expansion_at(power)
        rows.append({'power': power, 'kerr': e.kerr, 'beta': e.beta,
                     'target': e.kerr + e.beta * (n_bar - 1.0)})
        logger.debug(f"power {power:.4g}: K = {e.kerr:.4g}, beta = {e.beta:.4g}")
    table = pd.DataFrame(rows)

    values = table['target'].to_numpy()
    crossings = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)[0]
    if len(crossings) == 0:
        raise ConvergenceError(
            f"K + beta(<N>-1) keeps its sign on the drive grid: "
            f"K = {table['kerr'].iloc[0]:.4g} at {powers[0]:.4g}, "
            f"K = {table['kerr'].iloc[-1]:.4g} at {powers[-1]:.4g}",
            best=table)
    k = int(crossings[0])
    if values[k] == 0:
        power_opt = float(powers[k])
    else:
        power_opt = brentq(target, powers[k], powers[k + 1], xtol=TOLERANCES['ROOT'],
                           maxiter=DEFAULTS['BISECTION_ITERATIONS'])
    best = expansion_at(power_opt)
    logger.info(f"Kerr cancellation at |Omega/delta_d|^2 = {power_opt:.6g} "
                f"(seed {cancellation_seed(p):.4g})")
    return {
        'power_opt': float(power_opt),
        'omega_opt': abs(p.delta_d) * math.sqrt(power_opt),
        'K_at_opt': best.kerr,
        'beta_at_opt': best.beta,
        'seed_power': cancellation_seed(p),
        'n_bar': n_bar,
        'grid': table,
    }


def fidelity_power_scan(p: SystemParams, powers: Sequence[float], t: float,
                        beta: complex = DEFAULTS['CAT_BETA'],
                        ramp_steps: int = DEFAULTS['COUPLING_RAMP_STEPS']) -> pd.DataFrame:
    """Coherent cat fidelity at internal time t for each drive power."""
    rows = []
    for power in powers:
        spec = diagonalize_labeled(with_drive_power(p, power), ramp_steps=ramp_steps)
        cat = make_cat(spec, beta)
        rows.append({'power': float(power), 'F': float(coherent_fidelity(spec, cat, t))})
    return pd.DataFrame(rows)


def fidelity_width(scan: pd.DataFrame, drop: float = 0.01) -> float:
    """Full width in power of the region where F >= F_max - drop, linearly interpolated."""
    x = scan['power'].to_numpy(dtype=float)
    f = scan['F'].to_numpy(dtype=float)
    peak = int(np.argmax(f))
    level = f[peak] - drop
    lo = peak
    while lo > 0 and f[lo - 1] >= level:
        lo -= 1
    hi = peak
    while hi < len(f) - 1 and f[hi + 1] >= level:
        hi += 1
    if lo == 0 or hi == len(f) - 1:
        raise DomainError("power grid does not bracket the fidelity peak")
    left = np.interp(level, [f[lo - 1], f[lo]], [x[lo - 1], x[lo]])
    right = np.interp(level, [f[hi + 1], f[hi]], [x[hi + 1], x[hi]])
    return float(right - left)


# Wigner function

def displaced_parity_operators(zs, dim: int) -> np.ndarray:
    """
    Displaced parity D(z) P D(z)^dagger on the first ``dim`` levels for every z.

    D(z) = exp(z a^dagger - z^* a) is exponentiated in an enlarged space, via one
    eigendecomposition of i(a^dagger - a) and the rotation exp(i arg(z) N), so the block
    kept is free of truncation error for states supported on ``dim`` levels.
    """
    zs = np.atleast_1d(np.asarray(zs, dtype=complex)).ravel()
    radius = float(np.max(np.abs(zs))) if zs.size else 0.0
    big = dim + int(math.ceil((radius + 3.0) ** 2))
    a, adag = ladder(big)
    values, vectors = np.linalg.eigh(1j * (adag - a))
    parity = (-1.0) ** np.arange(big)
    B = (vectors.conj().T * parity) @ vectors
    head = vectors[:dim]
    N = np.arange(dim)
    out = np.empty((zs.size, dim, dim), dtype=complex)
    for k, z in enumerate(zs):
        phase = np.exp(-1j * abs(z) * values)
        left = head * phase
        block = left @ B @ left.conj().T
        rotation = np.exp(1j * np.angle(z) * N)
        out[k] = rotation[:, None] * block * rotation.conj()[None, :]
    return out


def cavity_density(matrix: np.ndarray, dims) -> np.ndarray:
    """Trace out the transmon and cavity b from a density matrix over (m, N_a, N_b)."""
    n_t, n_a, n_b = dims
    r = np.asarray(matrix).reshape(n_t, n_a, n_b, n_t, n_a, n_b)
    return np.einsum('manmkn->ak', r)


def _as_cavity_density(state_or_rho) -> np.ndarray:
    if isinstance(state_or_rho, DensityOperator):
        return state_or_rho.cavity()
    if isinstance(state_or_rho, QuantumState):
        psi = state_or_rho.amplitudes
        return np.outer(psi, psi.conj())
    arr = np.asarray(state_or_rho, dtype=complex)
    if arr.ndim == 1:
        return np.outer(arr, arr.conj())
    return arr


def wigner(state_or_rho, zs, operators: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Wigner function W(z) = (2/pi) Tr(D^dagger(z) rho D(z) P) of cavity a.

    Args:
        state_or_rho: QuantumState, amplitude vector, DensityOperator or cavity density matrix
        zs: Complex displacements (any shape)
        operators: Precomputed displaced_parity_operators for the same zs and dimension

    Returns:
        Real array with the shape of ``zs``
    """
    rho = _as_cavity_density(state_or_rho)
    dim = rho.shape[0]
    zs_arr = np.asarray(zs, dtype=complex)
    reach = float(np.max(np.abs(zs_arr))) ** 2 if zs_arr.size else 0.0
    if reach > THRESHOLDS['WIGNER_RADIUS_FRACTION'] * dim:
        warn_regime(f"Wigner grid reaches |z|^2 = {reach:.3g}, "
                    f"beyond {THRESHOLDS['WIGNER_RADIUS_FRACTION']} of the {dim}-level truncation")
    if operators is None:
        operators = displaced_parity_operators(zs_arr, dim)
    values = (2.0 / math.pi) * np.einsum('pji,ij->p', operators, rho)
    if values.size and float(np.max(np.abs(values.imag))) > 1e-10:
        logger.warning(f"Wigner function has imaginary part {np.max(np.abs(values.imag)):.3g}")
    return values.real.reshape(zs_arr.shape)


def wigner_table(zs, field_values) -> pd.DataFrame:
    """Flat (re_z, im_z, W) table."""
    zs = np.asarray(zs, dtype=complex).ravel()
    return pd.DataFrame({'re_z': zs.real, 'im_z': zs.imag,
                         'W': np.asarray(field_values, dtype=float).ravel()})


def square_grid(radius: float, step: float) -> np.ndarray:
    """Square grid of complex displacements covering |Re z|, |Im z| <= radius."""
    axis = np.arange(-radius, radius + 0.5 * step, step)
    re, im = np.meshgrid(axis, axis, indexing='ij')
    return re + 1j * im


# Lindblad evolution

class LindbladEngine:
    """
    Master equation d rho/dt = -i[H, rho] + gamma (c rho c^dagger - {c^dagger c, rho}/2) in the
    eigenbasis of H.

    The state is kept in the interaction picture, where the coherent part is absorbed in
    phases. Jump matrix elements c_ij are grouped by transition frequency E_i - E_j; elements
    of different groups (separated by more than the secular cutoff) do not interfere, while
    the residual frequencies inside a group are kept exactly.
    """

    def __init__(self, energies: np.ndarray, jump: np.ndarray, gamma: float,
                 cutoff: float = TOLERANCES['SECULAR_CUTOFF'],
                 prune: float = TOLERANCES['JUMP_PRUNE']):
        if gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {gamma}")
        self.energies = np.asarray(energies, dtype=float)
        self.dim = len(self.energies)
        self.gamma = float(gamma)
        jump = np.asarray(jump, dtype=complex)

        weights = np.abs(jump) ** 2
        scale = float(weights.max()) if weights.size else 0.0
        rows, cols = np.nonzero(weights > prune * scale) if scale > 0 else (np.array([], int),) * 2
        values = jump[rows, cols]
        freqs = self.energies[rows] - self.energies[cols]

        order = np.argsort(freqs, kind='stable')
        groups = (np.concatenate([[0], np.cumsum(np.diff(freqs[order]) > cutoff)])
                  if len(order) else [])
        group = np.empty(len(order), dtype=int)
        group[order] = groups

        dst, src, coef, pfreq = [], [], [], []
        anti_dst, anti_coef, anti_freq = [], [], []
        for label in np.unique(group):
            members = np.nonzero(group == label)[0]
            e1, e2 = np.meshgrid(members, members, indexing='ij')
            e1, e2 = e1.ravel(), e2.ravel()
            i, j, l, n = rows[e1], cols[e1], rows[e2], cols[e2]
            f = freqs[e1] - freqs[e2]
            dst.append(i * self.dim + l)
            src.append(j * self.dim + n)
            coef.append(values[e1] * values[e2].conj())
            pfreq.append(f)
            same = i == l
            anti_dst.append(j[same] * self.dim + n[same])
            anti_coef.append(values[e1][same].conj() * values[e2][same])
            anti_freq.append(-f[same])

        def stack(parts, dtype):
            return np.concatenate(parts).astype(dtype) if parts else np.array([], dtype=dtype)

        self._dst = stack(dst, int)
        self._src = stack(src, int)
        self._coef = stack(coef, complex)
        self._freq = stack(pfreq, float)
        self._anti_dst = stack(anti_dst, int)
        self._anti_coef = stack(anti_coef, complex)
        self._anti_freq = stack(anti_freq, float)
        self.n_groups = len(np.unique(group)) if len(group) else 0

        decay_norm = float(np.linalg.norm(jump.conj().T @ jump, 2)) if jump.size else 0.0
        residual = float(np.max(np.abs(self._freq))) if self._freq.size else 0.0
        bound = max(self.gamma * decay_norm, residual if self.gamma > 0 else 0.0)
        self.max_step = 0.1 / bound if bound > 0 else np.inf
        logger.debug(f"Lindblad engine: {len(rows)} jump elements in {self.n_groups} groups, "
                     f"{len(self._coef)} pairs, max_step {self.max_step:.3g}")

    def _bincount(self, index: np.ndarray, weights: np.ndarray) -> np.ndarray:
        size = self.dim * self.dim
        return (np.bincount(index, weights.real, minlength=size)
                + 1j * np.bincount(index, weights.imag, minlength=size))

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        """Time derivative of the flattened interaction-picture density matrix."""
        if self.gamma == 0:
            return np.zeros_like(y)
        d = self.dim
        rho = y.reshape(d, d)
        phased = self._coef * np.exp(1j * self._freq * t)
        sandwich = self._bincount(self._dst, phased * y[self._src])
        A = self._bincount(self._anti_dst,
                           self._anti_coef * np.exp(1j * self._anti_freq * t)).reshape(d, d)
        out = sandwich.reshape(d, d) - 0.5 * (A @ rho + rho @ A)
        return self.gamma * out.ravel()

    def to_schrodinger(self, rho_tilde: np.ndarray, t: float) -> np.ndarray:
        phase = np.exp(-1j * self.energies * t)
        return phase[:, None] * rho_tilde * phase.conj()[None, :]

    def evolve(self, rho0: np.ndarray, times: Sequence[float]) -> np.ndarray:
        """
        Integrate from t = 0 and return interaction-picture density matrices at ``times``.

        Raises:
            NumericalError: If an eigenvalue drops below the positivity abort threshold
        """
        times = np.asarray(times, dtype=float)
        if np.any(np.diff(times) < 0) or (times.size and times[0] < 0):
            raise ValueError("times must be non-negative and sorted")
        d = self.dim
        y0 = np.asarray(rho0, dtype=complex).ravel()
        t_end = float(times[-1]) if times.size else 0.0
        if self.gamma == 0 or t_end == 0:
            frames = np.repeat(y0.reshape(1, d, d), len(times), axis=0)
        else:
            solution = solve_ivp(self.rhs, (0.0, t_end), y0, method='RK45', t_eval=times,
                                 rtol=TOLERANCES['ODE_RTOL'], atol=TOLERANCES['ODE_ATOL'],
                                 max_step=self.max_step)
            if not solution.success:
                raise NumericalError(f"Lindblad integration failed: {solution.message}")
            frames = solution.y.T.reshape(len(times), d, d)

        for t, frame in zip(times, frames):
            lowest = float(np.linalg.eigvalsh(0.5 * (frame + frame.conj().T))[0])
            if lowest < TOLERANCES['POSITIVITY_ABORT']:
                raise NumericalError(
                    f"density matrix lost positivity at t = {t:.6g}: eigenvalue {lowest:.3g}, "
                    f"trace {np.trace(frame).real:.12g}; reduce ODE tolerances")
            if lowest < TOLERANCES['POSITIVITY_WARN']:
                logger.warning(f"small negative eigenvalue {lowest:.3g} at t = {t:.6g}")
            drift = abs(np.trace(frame) - np.trace(rho0))
            if drift > TOLERANCES['TRACE'] * max(1.0, t):
                logger.warning(f"trace drifted by {drift:.3g} at t = {t:.6g}")
        return frames


def dressed_jump_operator(spec: DressedSpectrum) -> np.ndarray:
    """Transmon lowering operator in the labeled dressed basis."""
    c, _ = ladder(spec.dims[0])
    c_full = embed(c, 0, spec.dims)
    return spec.states.conj().T @ c_full @ spec.states


def lindblad_engine(spec: DressedSpectrum, gamma: Optional[float] = None) -> LindbladEngine:
    gamma = spec.params.gamma if gamma is None else gamma
    return LindbladEngine(spec.energies.ravel(), dressed_jump_operator(spec), gamma)


def lindblad_evolve(p: SystemParams, rho0: DensityOperator, t_final: float, dt_control: float,
                    gamma: Optional[float] = None,
                    spec: Optional[DressedSpectrum] = None) -> List[DensityOperator]:
    """
    Evolve rho0 under transmon decay from t = 0 to ``t_final``, reporting every ``dt_control``.

    The integrator picks its own steps; ``dt_control`` only sets the output grid, which always
    ends on ``t_final``. Pass ``spec`` to reuse a labeled spectrum of ``p``.
    """
    if t_final < 0 or dt_control <= 0:
        raise ValueError(f"need t_final >= 0 and dt_control > 0, got {t_final}, {dt_control}")
    spec = diagonalize_labeled(p) if spec is None else spec
    times = np.arange(0.0, t_final, dt_control)
    times = np.append(times, t_final) if t_final > 0 else np.array([0.0])
    return evolve_on_spectrum(spec, rho0, times, p.gamma if gamma is None else gamma)


def evolve_on_spectrum(spec: DressedSpectrum, rho0: DensityOperator, times: Sequence[float],
                       gamma: Optional[float] = None) -> List[DensityOperator]:
    """
    Evolve a density matrix over the labeled dressed basis under transmon decay.

    Args:
        spec: Labeled spectrum of the coupled system
        rho0: Initial density operator over the dressed basis
        times: Sorted internal times at which to report the state
        gamma: Decay rate (units of alpha); defaults to ``spec.params.gamma``

    Returns:
        Schrodinger-picture density operators at ``times``
    """
    engine = lindblad_engine(spec, gamma)
    frames = engine.evolve(rho0.matrix, times)
    return [DensityOperator(engine.to_schrodinger(frame, t), t=float(t), dims=spec.dims)
            for t, frame in zip(np.asarray(times, dtype=float), frames)]


def lindblad_fidelity(spec: DressedSpectrum, beta: complex, times: Sequence[float],
                      gamma: Optional[float] = None) -> pd.DataFrame:
    """
    Fidelity F_gamma(t) = <Psi_approx(t)|rho(t)|Psi_approx(t)> of an even cat under decay.

    Returns:
        Table with columns t, t_us, F
    """
    cat = make_cat(spec, beta)
    engine = lindblad_engine(spec, gamma)
    psi = cat.dressed_vector()
    frames = engine.evolve(np.outer(psi, psi.conj()), times)

    energies = spec.energies[0, :, 0]
    omega_bar = mean_frequency(energies, cat.mean_photon_number)
    index = np.array([product_index((0, n, 0), spec.dims) for n in range(spec.dims[1])])
    N = np.arange(spec.dims[1])
    rows = []
    for t, frame in zip(np.asarray(times, dtype=float), frames):
        # Psi_approx in the interaction picture of H
        approx = cat.amplitudes * np.exp(-1j * N * omega_bar * t) * np.exp(1j * energies * t)
        block = frame[np.ix_(index, index)]
        rows.append({'t': t, 'F': float(np.real(approx.conj() @ block @ approx))})
    table = pd.DataFrame(rows)
    table.insert(1, 't_us', internal_to_us(table['t'].to_numpy(), spec.params.alpha_hz))
    return table


def infidelity_slope(table: pd.DataFrame) -> float:
    """Least-squares slope of 1 - F against internal time."""
    return float(np.polyfit(table['t'].to_numpy(), 1.0 - table['F'].to_numpy(), 1)[0])


# Rates

def cat_c_coefficient(beta: complex) -> float:
    """C = 1 - [J0(2|beta|^2) + I0(2|beta|^2)] / (2 cosh^2 |beta|^2)."""
    x = abs(beta) ** 2
    damping = math.exp(-2.0 * x)
    # 2 cosh^2 x = e^{2x} (1 + e^{-2x})^2 / 2
    denom = (1.0 + damping) ** 2 / 2.0
    return 1.0 - (j0(2.0 * x) * damping + i0e(2.0 * x)) / denom


def rate_budget(p: SystemParams, sol: FloquetSolution, spec: DressedSpectrum,
                beta: complex = DEFAULTS['CAT_BETA'],
                gamma: Optional[float] = None) -> RateBudget:
    """
    Inverse-Purcell and transmon-escape rates of the cat under transmon decay.

    kappa_gamma = |<psi_0,0|c|psi_0,1>|^2 gamma uses the dressed states; the escape rates
    W_0m = |<psi_m|c|psi_0>|^2 gamma use the driven-transmon states, skipping untrusted levels.
    """
    gamma = p.gamma if gamma is None else gamma
    c, _ = ladder(spec.dims[0])
    c_full = embed(c, 0, spec.dims)
    vacuum = spec.states[:, product_index((0, 0, 0), spec.dims)]
    one = spec.states[:, product_index((0, 1, 0), spec.dims)]
    kappa = abs(vacuum.conj() @ c_full @ one) ** 2 * gamma
    escape = {m: float(abs(sol.c_minus[m, 0]) ** 2 * gamma)
              for m in range(1, sol.n_levels) if m not in sol.untrusted}
    budget = RateBudget(kappa_gamma=float(kappa), escape=escape, c_coeff=cat_c_coefficient(beta),
                        n_bar=mean_photon_number(beta), gamma=float(gamma))
    logger.info(f"Rate budget: kappa_gamma = {budget.kappa_gamma:.4g}, "
                f"sum W = {budget.total_escape:.4g}, Purcell share {budget.purcell_share:.2%}")
    return budget


def kappa_gamma_perturbative(p: SystemParams, gamma: Optional[float] = None) -> float:
    """|g_a/delta_a|^2 (1 - (4 alpha |Omega_d|^2 / delta_d^3)(delta_d / delta_a)) gamma."""
    gamma = p.gamma if gamma is None else gamma
    drive = 4.0 * p.alpha * abs(p.omega_d) ** 2 / p.delta_d ** 3 * (p.delta_d / p.delta_a) \
        if p.omega_d != 0 else 0.0
    return abs(p.g_a / p.delta_a) ** 2 * (1.0 - drive) * gamma


def escape_rate_perturbative(p: SystemParams, gamma: Optional[float] = None) -> float:
    """W_01 ~ |alpha Omega_d^2 / (delta_d^2 (2 delta_d + alpha))|^2 gamma."""
    gamma = p.gamma if gamma is None else gamma
    if p.omega_d == 0:
        return 0.0
    amplitude = p.alpha * p.omega_d ** 2 / (p.delta_d ** 2 * (2.0 * p.delta_d + p.alpha))
    return abs(amplitude) ** 2 * gamma


def pure_dephasing_estimate(budget: RateBudget, chi_ac: float, gamma: float) -> float:
    """Order of magnitude of the long-time pure dephasing, W_01 (chi_AC / gamma)^2."""
    if gamma == 0:
        return 0.0
    return budget.escape.get(1, 0.0) * (chi_ac / gamma) ** 2


# Wigner fitting

def _cavity_energies(dim: int, delta_omega: float, kerr: float, beta: float) -> np.ndarray:
    N = np.arange(dim, dtype=float)
    return delta_omega * N + kerr / 2.0 * N * (N - 1) + beta / 6.0 * N * (N - 1) * (N - 2)


def default_cavity_dim(beta0: complex) -> int:
    amplitude = abs(beta0)
    return max(12, int(math.ceil(amplitude ** 2 + 6.0 * amplitude + 8.0)))


def simulate_cavity_wigner(zs, t: float, beta0: complex, delta_omega: float = 0.0,
                           kerr: float = 0.0, beta: float = 0.0, loss_rate: float = 0.0,
                           dim: Optional[int] = None,
                           operators: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Wigner function of an initial coherent state |beta0> after time t in the cavity model

        H = delta_omega N + K/2 N(N-1) + beta/6 N(N-1)(N-2)

    with single-photon loss at ``loss_rate``.
    """
    dim = default_cavity_dim(beta0) if dim is None else dim
    psi = coherent_amplitudes(beta0, dim)
    psi = psi / np.linalg.norm(psi)
    energies = _cavity_energies(dim, delta_omega, kerr, beta)
    a, _ = ladder(dim)
    engine = LindbladEngine(energies, a, loss_rate)
    frame = engine.evolve(np.outer(psi, psi.conj()), [t])[0]
    return wigner(engine.to_schrodinger(frame, t), zs, operators)


def _coordinate_descent(cost, n: int, max_sweeps: int):
    """
    Cyclic coordinate descent from the origin with a golden-section search per coordinate.

    Returns:
        (point, cost, sweeps, converged)
    """
    u = np.zeros(n)
    best = cost(u)
    for sweep in range(1, max_sweeps + 1):
        previous, moved = best, 0.0
        for k in range(n):
            def along(x, k=k):
                trial = u.copy()
                trial[k] = x
                return cost(trial)

            try:
                found = minimize_scalar(along, bracket=(u[k], u[k] + 1.0), method='golden',
                                        options={'xtol': TOLERANCES['FIT_XTOL'],
                                                 'maxiter': DEFAULTS['FIT_LINE_ITERATIONS']})
            except RuntimeError as exc:
                logger.debug(f"line search along coordinate {k} failed: {exc}")
                return u, best, sweep, False
            if found.fun < best:
                moved = max(moved, abs(float(found.x) - u[k]))
                u[k], best = float(found.x), float(found.fun)
        if moved < TOLERANCES['FIT_STEP'] or previous - best <= TOLERANCES['FIT_FTOL'] * previous:
            return u, best, sweep, True
    return u, best, max_sweeps, False


def fit_from_wigner(measured: np.ndarray, zs, fit_params: Mapping[str, float], t: float,
                    beta0: complex, loss_rate: float = 0.0,
                    fixed: Optional[Mapping[str, float]] = None,
                    spans: Optional[Mapping[str, float]] = None,
                    dim: Optional[int] = None,
                    max_sweeps: int = DEFAULTS['FIT_SWEEPS'],
                    method: str = 'coordinate') -> Dict[str, float]:
    """
    Least-squares fit of (delta_omega, K, beta) to a measured Wigner function.

    The default search is coordinate descent: every sweep runs a golden-section line search
    along each parameter in turn, in coordinates scaled by the parameter's span, until no
    parameter moves by more than the step tolerance. ``method='powell'`` swaps in Powell's
    conjugate directions, which settle in fewer sweeps when delta_omega and K are correlated.

    Args:
        measured: Wigner values on ``zs``
        zs: Complex displacements of the measurement
        fit_params: Starting values of the parameters to fit (subset of delta_omega, kerr, beta)
        t: Evolution time (internal units)
        beta0: Initial coherent amplitude
        loss_rate: Single-photon loss rate
        fixed: Values of the parameters held fixed (default 0)
        spans: Scale of each parameter's search (default half the starting value)
        max_sweeps: Iteration cap (coordinate sweeps or Powell iterations)
        method: 'coordinate' or 'powell'

    Returns:
        Fitted values, plus 'residual' (root of the summed squared residuals) and 'sweeps'

    Raises:
        ConvergenceError: If the fit has not settled after ``max_sweeps``; carries the best fit
    """
    unknown = set(fit_params) - set(FIT_PARAMETERS)
    if unknown:
        raise ValueError(f"cannot fit {sorted(unknown)}; choose from {FIT_PARAMETERS}")
    if method not in ('coordinate', 'powell'):
        raise ValueError(f"unknown fit method '{method}'")
    measured = np.asarray(measured, dtype=float).ravel()
    zs = np.asarray(zs, dtype=complex).ravel()
    if measured.shape != zs.shape:
        raise ValueError(f"measured field has {measured.size} points, grid has {zs.size}")
    dim = default_cavity_dim(beta0) if dim is None else dim
    operators = displaced_parity_operators(zs, dim)
    values = {name: 0.0 for name in FIT_PARAMETERS}
    values.update(fixed or {})
    values.update(fit_params)

    def cost(trial: Mapping[str, float]) -> float:
        simulated = simulate_cavity_wigner(
            zs, t, beta0, delta_omega=trial['delta_omega'], kerr=trial['kerr'],
            beta=trial['beta'], loss_rate=loss_rate, dim=dim, operators=operators)
        return float(np.sum((simulated - measured) ** 2))

    names = list(fit_params)
    start = np.array([values[name] for name in names], dtype=float)
    # u = (value - start) / span
    width = np.array([(spans or {}).get(name, DEFAULTS['FIT_SPAN'] * abs(values[name]) or 1e-3)
                      for name in names], dtype=float)

    def scaled_cost(u: np.ndarray) -> float:
        return cost({**values, **dict(zip(names, start + width * u))})

    if method == 'coordinate':
        u, fun, sweeps, converged = _coordinate_descent(scaled_cost, len(names), max_sweeps)
        reason = f"largest step above {TOLERANCES['FIT_STEP']:g}"
    else:
        found = minimize(scaled_cost, np.zeros(len(names)), method='Powell',
                         options={'xtol': TOLERANCES['FIT_XTOL'],
                                  'ftol': TOLERANCES['FIT_FTOL'], 'maxiter': max_sweeps})
        u, fun, sweeps = np.atleast_1d(found.x), float(found.fun), int(found.nit)
        converged, reason = bool(found.success), found.message
    values.update(zip(names, (start + width * u).tolist()))
    result = {name: float(values[name]) for name in FIT_PARAMETERS}
    result.update(residual=math.sqrt(fun), sweeps=sweeps)
    logger.debug(f"Wigner fit ({method}) after {sweeps} sweeps: cost {fun:.6g}")
    if not converged:
        raise ConvergenceError(f"Wigner fit did not settle in {max_sweeps} sweeps: {reason}",
                               best=result)
    return result
