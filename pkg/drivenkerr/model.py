"""
Physical parameters and rotating-frame Hamiltonians of a driven transmon coupled to
one or two cavities.

All frequencies are angular and measured in units of the anharmonicity alpha. Detunings
are referenced to the bare transmon transition omega_10:

    delta_x = omega_x - omega_10,    delta_dc = delta_d - alpha,
    delta_dx = delta_d - delta_x  (x = a, b).
"""

import cmath
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from .algebra import Operator, embed, ladder, number
from .config import DEFAULTS, DIM_CAP, OPTIONAL_PARAM_KEYS, PARAM_KEYS, THRESHOLDS
from .errors import ConfigError, InvalidDimensionError
from .utils import warn_regime

logger = logging.getLogger("drivenkerr.model")


@dataclass(frozen=True)
class DetuningConventions:
    """Level-resolved drive detunings and amplitudes of the driven transmon."""

    delta_dc: float
    alpha: float
    omega_d: complex

    def delta_dm(self, m: int) -> float:
        """Drive detuning from the m -> m+1 transition: delta_dc + (m+1) alpha."""
        return self.delta_dc + (m + 1) * self.alpha

    def omega_dm(self, m: int) -> complex:
        """Drive matrix element between levels m and m+1: sqrt(m+1) Omega_d."""
        return math.sqrt(m + 1) * self.omega_d


@dataclass(frozen=True)
class SystemParams:
    """
    All physical constants of the transmon-cavity system.

    Frequencies are in units of alpha; ``alpha_hz`` fixes the physical scale.
    """

    alpha: float = DEFAULTS['ALPHA']
    delta_a: float = 10.0
    delta_b: float = 10.0
    delta_d: float = 3.0
    g_a: complex = 0.0
    g_b: complex = 0.0
    omega_d: complex = 0.0
    n_transmon: int = DEFAULTS['N_TRANSMON']
    n_a: int = DEFAULTS['N_A']
    n_b: int = DEFAULTS['N_B']
    gamma: float = 0.0
    alpha_hz: float = 0.168e9
    e_c_hz: Optional[float] = None
    e_j_hz: Optional[float] = None

    def __post_init__(self):
        if self.n_transmon < 3:
            raise InvalidDimensionError(f"n_transmon must be >= 3, got {self.n_transmon}")
        if self.n_a < 2:
            raise InvalidDimensionError(f"n_a must be >= 2, got {self.n_a}")
        if self.n_b < 1:
            raise InvalidDimensionError(f"n_b must be >= 1, got {self.n_b}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be non-negative, got {self.gamma}")
        for name, g, delta in (('a', self.g_a, self.delta_a), ('b', self.g_b, self.delta_b)):
            if g != 0 and (delta == 0 or abs(g / delta) >= THRESHOLDS['DISPERSIVE_RATIO']):
                warn_regime(
                    f"cavity {name} is not dispersive: |g_{name}/delta_{name}| >= 1 "
                    f"(g={abs(g):.4g}, delta={delta:.4g})"
                )

    # Derived detunings

    @property
    def delta_dc(self) -> float:
        return self.delta_d - self.alpha

    @property
    def delta_da(self) -> float:
        return self.delta_d - self.delta_a

    @property
    def delta_db(self) -> float:
        return self.delta_d - self.delta_b

    @property
    def drive_phase(self) -> float:
        return cmath.phase(self.omega_d) if self.omega_d != 0 else 0.0

    @property
    def drive_power(self) -> float:
        """Scaled drive power |Omega_d / delta_d|^2."""
        if self.delta_d == 0:
            return math.inf if self.omega_d != 0 else 0.0
        return abs(self.omega_d / self.delta_d) ** 2

    @property
    def conventions(self) -> DetuningConventions:
        return DetuningConventions(self.delta_dc, self.alpha, complex(self.omega_d))

    @property
    def dims(self) -> Tuple[int, int, int]:
        return (self.n_transmon, self.n_a, self.n_b)

    @property
    def dim(self) -> int:
        return self.n_transmon * self.n_a * self.n_b

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    # Config boundary

    @classmethod
    def from_config(cls, mapping: Mapping[str, Any]) -> "SystemParams":
        """
        Build parameters from the flat key-value form.

        Args:
            mapping: Keys from PARAM_KEYS, optionally e_c_hz and e_j_hz

        Returns:
            Validated SystemParams
        """
        unknown = set(mapping) - set(PARAM_KEYS) - set(OPTIONAL_PARAM_KEYS)
        if unknown:
            raise ConfigError(f"unknown system keys: {sorted(unknown)}")
        try:
            e_c = mapping.get('e_c_hz')
            e_j = mapping.get('e_j_hz')
            alpha_hz = mapping.get('alpha_hz')
            if alpha_hz is None:
                # hbar alpha = E_C
                alpha_hz = float(e_c) if e_c is not None else 0.168e9
            params = cls(
                delta_a=float(mapping.get('delta_a', 10.0)),
                delta_b=float(mapping.get('delta_b', 10.0)),
                delta_d=float(mapping.get('delta_d', 3.0)),
                g_a=complex(float(mapping.get('g_a_re', 0.0)), float(mapping.get('g_a_im', 0.0))),
                g_b=complex(float(mapping.get('g_b_re', 0.0)), float(mapping.get('g_b_im', 0.0))),
                omega_d=complex(float(mapping.get('omega_d_re', 0.0)),
                                float(mapping.get('omega_d_im', 0.0))),
                n_transmon=int(mapping.get('n_transmon', DEFAULTS['N_TRANSMON'])),
                n_a=int(mapping.get('n_a', DEFAULTS['N_A'])),
                n_b=int(mapping.get('n_b', DEFAULTS['N_B'])),
                gamma=float(mapping.get('gamma', 0.0)),
                alpha_hz=float(alpha_hz),
                e_c_hz=None if e_c is None else float(e_c),
                e_j_hz=None if e_j is None else float(e_j),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid system parameter: {str(e)}")
        if params.alpha_hz <= 0:
            raise ConfigError(f"alpha_hz must be positive, got {params.alpha_hz}")
        if params.e_c_hz is not None and params.e_j_hz is not None:
            rwa_validity(params)
        return params

    def to_config(self) -> Dict[str, Any]:
        config = {
            'alpha_hz': self.alpha_hz,
            'delta_a': self.delta_a,
            'delta_b': self.delta_b,
            'delta_d': self.delta_d,
            'g_a_re': complex(self.g_a).real,
            'g_a_im': complex(self.g_a).imag,
            'g_b_re': complex(self.g_b).real,
            'g_b_im': complex(self.g_b).imag,
            'omega_d_re': complex(self.omega_d).real,
            'omega_d_im': complex(self.omega_d).imag,
            'n_transmon': self.n_transmon,
            'n_a': self.n_a,
            'n_b': self.n_b,
            'gamma': self.gamma,
        }
        if self.e_c_hz is not None:
            config['e_c_hz'] = self.e_c_hz
        if self.e_j_hz is not None:
            config['e_j_hz'] = self.e_j_hz
        return config


def with_drive_power(p: SystemParams, power: float) -> SystemParams:
    """Return parameters with |Omega_d/delta_d|^2 = power, keeping the drive phase."""
    if power < 0:
        raise ConfigError(f"drive power must be non-negative, got {power}")
    amplitude = math.sqrt(power) * abs(p.delta_d)
    return p.replace(omega_d=amplitude * cmath.exp(1j * p.drive_phase))


def rwa_validity(p: SystemParams) -> Dict[str, float]:
    """
    Ratios that must stay small for the rotating-wave approximation.

    Only available when the circuit energies are known, since omega_c = sqrt(8 E_C E_J).
    A warning is emitted for each ratio above the configured threshold.
    """
    if p.e_c_hz is None or p.e_j_hz is None:
        return {}
    omega_c_hz = math.sqrt(8.0 * p.e_c_hz * p.e_j_hz)
    scale = p.alpha_hz / omega_c_hz
    ratios = {
        'drive_amplitude': abs(p.omega_d) * scale,
        'drive_detuning': abs(p.delta_dc) * scale,
        'cavity_a_detuning': abs(p.delta_a + p.alpha) * scale,
        'cavity_b_detuning': abs(p.delta_b + p.alpha) * scale if p.n_b > 1 else 0.0,
        'anharmonicity': p.alpha * scale,
    }
    for name, ratio in ratios.items():
        if ratio > THRESHOLDS['RWA_RATIO']:
            warn_regime(f"RWA validity: {name}/omega_c = {ratio:.3g} exceeds "
                        f"{THRESHOLDS['RWA_RATIO']}")
    return ratios


def driven_transmon_hamiltonian(p: SystemParams, extra_diagonal: Optional[np.ndarray] = None,
                                omega_d: Optional[complex] = None) -> Operator:
    """
    Rotating-frame Hamiltonian of the driven transmon alone.

    H = -delta_dc n - (alpha/2)(n+1)n + Omega_d c^dagger + Omega_d^* c

    Args:
        p: System parameters
        extra_diagonal: Optional level shifts added to the diagonal
        omega_d: Drive amplitude override (used by adiabatic ramps)

    Returns:
        Hermitian matrix of dimension n_transmon
    """
    c, cdag = ladder(p.n_transmon)
    n = np.arange(p.n_transmon, dtype=float)
    drive = p.omega_d if omega_d is None else omega_d
    H = np.diag(-p.delta_dc * n - 0.5 * p.alpha * n * (n + 1)).astype(complex)
    if extra_diagonal is not None:
        H = H + np.diag(np.asarray(extra_diagonal, dtype=float))
    H = H + drive * cdag + np.conj(drive) * c
    return H


def coupled_hamiltonian_parts(p: SystemParams,
                              transmon_hamiltonian: Optional[Operator] = None
                              ) -> Tuple[Operator, Operator]:
    """
    Uncoupled part and coupling of the transmon-cavity Hamiltonian, H = H0 + V.

    Args:
        p: System parameters
        transmon_hamiltonian: Override for the driven transmon block

    Returns:
        Tuple of (H0, V) over the [transmon, cavity-a, cavity-b] product space
    """
    dims = p.dims
    if p.dim > DIM_CAP:
        raise InvalidDimensionError(
            f"product dimension {p.dim} = {dims[0]}x{dims[1]}x{dims[2]} exceeds cap {DIM_CAP}"
        )
    H_anc = driven_transmon_hamiltonian(p) if transmon_hamiltonian is None else transmon_hamiltonian
    c, cdag = ladder(p.n_transmon)
    a, _ = ladder(p.n_a)

    H0 = embed(H_anc, 0, dims) - p.delta_da * embed(number(p.n_a), 1, dims)
    cavity = p.g_a * embed(a, 1, dims)
    if p.n_b > 1:
        b, _ = ladder(p.n_b)
        H0 = H0 - p.delta_db * embed(number(p.n_b), 2, dims)
        cavity = cavity + p.g_b * embed(b, 2, dims)
    coupling = cavity @ embed(cdag, 0, dims)
    V = coupling + coupling.conj().T
    return H0, V


def coupled_hamiltonian(p: SystemParams) -> Operator:
    """
    Full RWA Hamiltonian of the transmon coupled to cavities a and b.

    H = -delta_da N_a - delta_db N_b + H_anc + (g_a a + g_b b) c^dagger + h.c.
    Cavity b is dropped entirely when n_b = 1.
    """
    H0, V = coupled_hamiltonian_parts(p)
    logger.debug(f"Built coupled Hamiltonian of dimension {H0.shape[0]}")
    return H0 + V
