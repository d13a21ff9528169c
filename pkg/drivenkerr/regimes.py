"""
Closed-form cavity nonlinearities in the limiting regimes of the driven transmon.

Covers the undriven eigenmode Kerr and its sixth-order corrections, the two-level
dispersive Hamiltonian, the drive-induced multiplier Delta_m in the weak-drive,
two-level and semiclassical limits, the ac-Stark and two-level nonlinearity ladders,
and the near-resonant two-level ladder around omega_a + omega_d ~ omega_20.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .config import THRESHOLDS, TOLERANCES
from .errors import DomainError
from .model import SystemParams
from .utils import double_factorial, warn_regime

logger = logging.getLogger("drivenkerr.regimes")

MODES = ('A', 'B', 'C')


@dataclass(frozen=True)
class Participation:
    """Linear participation of the eigenmodes on the bare transmon."""

    xi_a: complex
    xi_b: complex
    xi_c: complex = 1.0

    def of(self, mode: str) -> complex:
        return {'A': self.xi_a, 'B': self.xi_b, 'C': self.xi_c}[mode]


@dataclass(frozen=True)
class ChiMatrix:
    """Symmetric quartic coefficients chi_XX' of the eigenmodes."""

    chi: Dict[Tuple[str, str], float]

    def __getitem__(self, key: Union[str, Tuple[str, str]]) -> float:
        if isinstance(key, str):
            key = (key[0], key[1])
        return self.chi[key] if key in self.chi else self.chi[(key[1], key[0])]


@dataclass(frozen=True)
class DriveDelta:
    """Drive-induced Kerr multiplier Delta_m."""

    value: float

    @property
    def s(self) -> float:
        """Self-Kerr asymptote coefficient s_m = -1 + Delta_m."""
        return -1.0 + self.value

    @property
    def c(self) -> float:
        """Cross-Kerr asymptote coefficient c_m = -1 + Delta_m / 2."""
        return -1.0 + 0.5 * self.value


def participation(p: SystemParams) -> Participation:
    """Leading-order participation ratios xi_A = g_a/delta_a, xi_B = g_b/delta_b, xi_C = 1."""
    xi_a = p.g_a / p.delta_a if p.g_a != 0 else 0.0
    xi_b = p.g_b / p.delta_b if p.g_b != 0 else 0.0
    return Participation(xi_a=xi_a, xi_b=xi_b, xi_c=1.0)


def chi_matrix(part: Participation, alpha: float) -> ChiMatrix:
    """chi_XX = alpha |xi_X|^4 and chi_XX' = 2 alpha |xi_X xi_X'|^2."""
    chi = {}
    for i, x in enumerate(MODES):
        for y in MODES[i:]:
            if x == y:
                chi[(x, y)] = alpha * abs(part.of(x)) ** 4
            else:
                chi[(x, y)] = 2.0 * alpha * abs(part.of(x) * part.of(y)) ** 2
    return ChiMatrix(chi)


def dispersive_chi_ac(p: SystemParams, which: str = 'a') -> float:
    """
    Dispersive shift between a cavity and the transmon with the transmon level structure
    kept: chi_XC = 2 alpha |g|^2 / |delta (delta + alpha)|.
    """
    g, delta = (p.g_a, p.delta_a) if which == 'a' else (p.g_b, p.delta_b)
    if g == 0:
        return 0.0
    den = delta * (delta + p.alpha)
    if den == 0:
        raise DomainError(f"dispersive shift undefined at delta_{which} = {delta}")
    return 2.0 * p.alpha * abs(g) ** 2 / abs(den)


def sixth_order_corrections(part: Participation, p: SystemParams) -> Dict[str, Dict[str, float]]:
    """
    Next-order corrections in alpha/delta to the undriven quartic Hamiltonian.

    The eigenmode detunings delta_AC, delta_BC are approximated by delta_a, delta_b.

    Returns:
        Dict with 'tilde_delta' (AC, BC), 'epsilon' (AA, BB, CC, AC, BC, AB) and
        'beta' (A, B, AB, BA)
    """
    chi = chi_matrix(part, p.alpha)
    d = {'A': p.delta_a, 'B': p.delta_b}
    if d['A'] == 0 or (part.xi_b != 0 and d['B'] == 0):
        raise DomainError("sixth-order corrections need nonzero cavity detunings")

    def inv(x: float) -> float:
        return 1.0 / x if x != 0 else 0.0

    tilde_delta = {
        f"{x}C": d[x] + p.alpha * (abs(part.xi_c) ** 2 - abs(part.of(x)) ** 2) / 2.0 for x in 'AB'
    }
    epsilon = {
        'AA': 9.0 * chi['CC'] * inv(d['A']),
        'BB': 9.0 * chi['CC'] * inv(d['B']),
        'CC': -chi['AC'] * inv(d['A']) - chi['BC'] * inv(d['B']),
        'AC': 1.5 * chi['CC'] * inv(d['A']),
        'BC': 1.5 * chi['CC'] * inv(d['B']),
        'AB': 2.0 * chi['CC'] * (inv(d['A'] + d['B']) + 2.0 * inv(d['A']) + 2.0 * inv(d['B'])),
    }
    beta = {
        'A': 1.5 * chi['AA'] * chi['AC'] * inv(d['A']),
        'B': 1.5 * chi['BB'] * chi['BC'] * inv(d['B']),
    }
    for x, y in (('A', 'B'), ('B', 'A')):
        prefactor = chi[x + x] * chi[y + 'C']
        if prefactor == 0:
            beta[x + y] = 0.0
            continue
        skew = 2.0 * d[x] - d[y]
        if skew == 0:
            raise DomainError(f"beta_{x}{y} diverges at 2 delta_{x}C = delta_{y}C")
        beta[x + y] = prefactor * (1.0 / d[x] + 4.0 / d[y] + 1.0 / skew)
    return {'tilde_delta': tilde_delta, 'epsilon': epsilon, 'beta': beta}


def tls_dispersive_coeffs(p: SystemParams) -> Dict[str, float]:
    """
    Coefficients of the two-level dispersive Hamiltonian to fourth order in g/delta.

    With sigma_z = +1 on the first excited state and -1 on the ground state,

        H = delta_a N_A + delta_b N_B - (lamb_a + lamb_b) sigma_z / 2
            - (lamb_a N_A + lamb_b N_B) sigma_z
            + (kerr_a N_A^2 + kerr_b N_B^2 + cross N_A N_B) sigma_z

    so the quartic terms enter with opposite signs in the two transmon states.
    """
    out = {}
    for x, g, delta in (('a', p.g_a, p.delta_a), ('b', p.g_b, p.delta_b)):
        if g != 0 and delta == 0:
            raise DomainError(f"two-level dispersive coefficients undefined at delta_{x} = 0")
        out[f"lamb_{x}"] = abs(g) ** 2 / delta if g != 0 else 0.0
        out[f"kerr_{x}"] = abs(g) ** 4 / delta ** 3 if g != 0 else 0.0
    if p.g_a != 0 and p.g_b != 0:
        out['cross'] = (2.0 * abs(p.g_a * p.g_b) ** 2 * (p.delta_a + p.delta_b)
                        / (p.delta_a ** 2 * p.delta_b ** 2))
    else:
        out['cross'] = 0.0
    return out


def tls_dispersive_energy(p: SystemParams, sigma_z: int, N_A: int, N_B: int = 0) -> float:
    """Energy of |sigma_z, N_A, N_B> under the two-level dispersive Hamiltonian."""
    if sigma_z not in (-1, 1):
        raise ValueError(f"sigma_z must be +1 or -1, got {sigma_z}")
    k = tls_dispersive_coeffs(p)
    quartic = k['kerr_a'] * N_A ** 2 + k['kerr_b'] * N_B ** 2 + k['cross'] * N_A * N_B
    return (p.delta_a * N_A + p.delta_b * N_B
            - 0.5 * (k['lamb_a'] + k['lamb_b']) * sigma_z
            - (k['lamb_a'] * N_A + k['lamb_b'] * N_B) * sigma_z
            + quartic * sigma_z)


def delta_weak_drive(p: SystemParams, m: int) -> DriveDelta:
    """Second-order-in-drive multiplier Delta_m."""
    power = abs(p.omega_d) ** 2
    if power == 0:
        return DriveDelta(0.0)
    upper = p.delta_d + m * p.alpha
    lower = p.delta_d + (m - 1) * p.alpha
    if upper == 0 or (m > 0 and lower == 0):
        raise DomainError(f"weak-drive Delta_{m} diverges: "
                          "drive resonant with a transmon transition")
    value = (m + 1) / upper ** 3
    if m > 0:
        value -= m / lower ** 3
    return DriveDelta(8.0 * p.alpha * power * value)


def delta_tls(p: SystemParams, m0: int = 0) -> Tuple[DriveDelta, DriveDelta]:
    """
    Two-level multiplier pair (Delta_m0, Delta_m0+1 = -Delta_m0), valid for
    |delta_d + m0 alpha| << alpha.
    """
    detuning = p.delta_d + m0 * p.alpha
    if abs(detuning) >= p.alpha:
        warn_regime(f"two-level approximation needs |delta_d + m0 alpha| << alpha, "
                    f"got {abs(detuning):.3g}")
    power = abs(p.omega_d) ** 2
    den = (detuning ** 2 + 4.0 * (m0 + 1) * power) ** 1.5
    if den == 0:
        return DriveDelta(0.0), DriveDelta(0.0)
    value = 8.0 * (m0 + 1) * np.sign(detuning) * p.alpha * power / den
    return DriveDelta(float(value)), DriveDelta(float(-value))


def tls_maximum(p: SystemParams, m0: int = 0) -> Dict[str, float]:
    """
    Largest |Delta_m0| over drive amplitude.

    Reports the closed-form maximum 4/sqrt(27) alpha/|delta_d + m0 alpha|, the numerically
    maximizing amplitude, its closed form |delta_d + m0 alpha|/sqrt(2 (m0+1)) and the
    commonly quoted |delta_d + m0 alpha|/2, which does not maximize the expression.
    """
    detuning = abs(p.delta_d + m0 * p.alpha)
    if detuning == 0:
        raise DomainError("two-level maximum undefined for a resonant drive")

    def negative(amplitude: float) -> float:
        return -abs(delta_tls(p.replace(omega_d=amplitude), m0)[0].value)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        found = minimize_scalar(negative, bounds=(0.0, 10.0 * detuning), method='bounded',
                                options={'xatol': 1e-10 * detuning})
    return {
        'max_value': 4.0 / math.sqrt(27.0) * p.alpha / detuning,
        'numeric_max_value': float(-found.fun),
        'numeric_maximizer': float(found.x),
        'closed_form_maximizer': detuning / math.sqrt(2.0 * (m0 + 1)),
        'stated_maximizer': detuning / 2.0,
    }


def _cubic_root(rhs: float, s: float) -> float:
    """Branch of Q (Q^2 + s) = rhs continuous from Q = 0 at rhs = 0."""
    if rhs < 0:
        raise DomainError(f"semiclassical drive parameter must be non-negative, got {rhs}")
    if rhs == 0:
        return 0.0
    if s > 0:
        # Cardano, single real root
        disc = math.sqrt(rhs ** 2 / 4.0 + 1.0 / 27.0)
        return float(np.cbrt(rhs / 2.0 + disc) + np.cbrt(rhs / 2.0 - disc))
    fold = 2.0 / (3.0 * math.sqrt(3.0))
    if rhs >= fold:
        raise DomainError(f"no small-amplitude state past the bistability fold "
                          f"({rhs:.4g} >= {fold:.4g})")
    return float(brentq(lambda q: q * (q * q - 1.0) - rhs, -1.0 / math.sqrt(3.0), 0.0,
                        xtol=TOLERANCES['ROOT']))


def classical_amplitude(p: SystemParams) -> Tuple[float, float, float]:
    """
    Scaled classical response of the driven transmon mode.

    Returns:
        Tuple (Q0, s, lam) with s = sgn(delta_dc) and lam = alpha / (2 |delta_dc|)
    """
    if p.delta_dc == 0:
        raise DomainError("semiclassical analysis needs delta_dc != 0")
    s = math.copysign(1.0, p.delta_dc)
    omega_bar = abs(p.omega_d) * math.sqrt(p.alpha / abs(p.delta_dc) ** 3)
    return _cubic_root(omega_bar, s), s, p.alpha / (2.0 * abs(p.delta_dc))


def delta_semiclassical(p: SystemParams, m: int) -> DriveDelta:
    """Delta_m to first order in alpha/delta_dc for a far-detuned drive."""
    if p.delta_dc <= 0:
        raise DomainError(f"semiclassical Delta_m needs delta_dc > 0, got {p.delta_dc}")
    if p.delta_dc < THRESHOLDS['SEMICLASSICAL_DETUNING'] * p.alpha:
        warn_regime(f"semiclassical limit needs delta_dc >> alpha, got delta_dc/alpha = "
                    f"{p.delta_dc / p.alpha:.3g}")
    q0, _, _ = classical_amplitude(p)
    q2 = q0 * q0
    leading = 8.0 * q2 / (3.0 * q2 + 1.0)
    correction = (12.0 * (m + 0.5) * (p.alpha / p.delta_dc) * q2 * (4.0 + 3.0 * q2)
                  * math.sqrt((3.0 * q2 + 1.0) * (q2 + 1.0)) / (1.0 + 3.0 * q2) ** 4)
    return DriveDelta(leading - correction)


def semiclassical_expansion(p: SystemParams, third_order: bool = False) -> Dict[str, object]:
    """
    Expansion of the classical extremum value g0 and the small-oscillation frequency nu0
    in eta = (chi_AC N_A + chi_BC N_B)/|delta_dc|.

    Coefficient lists are ordered [eta^0, eta^1, eta^2 (, eta^3)], so that
    g0(eta) = sum_k g0_coeffs[k] eta^k.
    """
    q0, s, lam = classical_amplitude(p)
    omega_bar = abs(p.omega_d) * math.sqrt(p.alpha / abs(p.delta_dc) ** 3)
    q2 = q0 * q0
    g0 = -0.5 * s * q2 - 0.25 * q2 * q2 + omega_bar * q0
    nu0 = math.sqrt((s + 3.0 * q2) * (s + q2))
    g0_coeffs = [g0, -0.5 * q2, 0.5 * q2 / (3.0 * q2 + s)]
    nu0_coeffs = [
        nu0,
        nu0 / (s + 3.0 * q2) ** 2,
        0.5 * 3.0 * nu0 * q2 * (4.0 * s + 3.0 * q2) / (s + 3.0 * q2) ** 4,
    ]
    if third_order:
        logger.debug("Including cubic g0 correction")
        # cubic Q0 in the denominator
        g0_coeffs.append(-q2 * (s + q2) / (2.0 * (3.0 * q0 ** 3 + s) ** 3))
    return {'Q0': q0, 'sign': s, 'lambda': lam, 'g0_coeffs': g0_coeffs, 'nu0_coeffs': nu0_coeffs}


def stark_expansion(p: SystemParams, m: int, chi: Union[ChiMatrix, float],
                    order: int) -> List[float]:
    """
    Coefficients of (chi_AC N_A + chi_BC N_B)^n, n = 0..order, in the second-order ac Stark
    shift of transmon level m.
    """
    conv = p.conventions
    chi_ac = chi['AC'] if isinstance(chi, ChiMatrix) else float(chi)
    coefficients = []
    for n in range(order + 1):
        value = 0.0
        if m > 0:
            value += abs(conv.omega_dm(m - 1)) ** 2 / (-conv.delta_dm(m - 1)) ** (n + 1)
        value -= abs(conv.omega_dm(m)) ** 2 / (-conv.delta_dm(m)) ** (n + 1)
        coefficients.append(float(value))
    limits = [abs(conv.delta_dm(m))] + ([abs(conv.delta_dm(m - 1))] if m > 0 else [])
    if chi_ac >= min(limits):
        warn_regime(f"ac Stark expansion diverges: chi_AC = {chi_ac:.3g} >= "
                    f"|delta_d,m| = {min(limits):.3g}")
    return coefficients


def tls_series_coefficient(n: int, delta: float, delta_tilde: float) -> float:
    """
    Coefficient of (x/delta_tilde)^n in delta_tilde(x)/delta_tilde, where
    delta_tilde(x) = sgn(delta + x) sqrt((delta + x)^2 + 4 |Omega|^2).
    """
    if delta_tilde == 0:
        raise DomainError("two-level series undefined at zero dressed detuning")
    ratio = delta / delta_tilde
    total = 0.0
    for k in range(math.ceil(n / 2), n + 1):
        total += ((-1) ** (k + 1) * 2.0 ** (k - n) * double_factorial(2 * k - 3)
                  / (math.factorial(2 * k - n) * math.factorial(n - k)) * ratio ** (2 * k - n))
    return total


def tls_nonlinearity_ladder(p: SystemParams, m0: int, chi: ChiMatrix) -> Dict[str, float]:
    """
    Drive-induced nonlinearities of both cavities with the transmon restricted to m0, m0+1,
    each scaled by the matching static coefficient (chi_AA, chi_BB or chi_AB).
    """
    conv = p.conventions
    delta = conv.delta_dm(m0)
    power = abs(conv.omega_dm(m0)) ** 2
    keys = ('chi_AA', 'chi_BB', 'chi_AB', 'beta_A', 'beta_B', 'beta_AB', 'beta_BA',
            'sigma_A', 'sigma_B')
    if power == 0:
        return {k: 0.0 for k in keys}
    tilde = math.copysign(math.sqrt(delta ** 2 + 4.0 * power), delta if delta != 0 else 1.0)
    base = 8.0 * p.alpha * power / tilde ** 3
    ratio = delta / tilde
    chi_ac, chi_bc = chi['AC'], chi['BC']
    quartic = -3.0 * base * (5.0 * delta ** 2 - tilde ** 2) / tilde ** 4
    return {
        'tilde_delta': tilde,
        'chi_AA': base,
        'chi_BB': base,
        'chi_AB': 0.5 * base,
        'beta_A': 3.0 * base * chi_ac / tilde * ratio,
        'beta_B': 3.0 * base * chi_bc / tilde * ratio,
        'beta_AB': 1.5 * base * chi_ac / tilde * ratio,
        'beta_BA': 1.5 * base * chi_bc / tilde * ratio,
        'sigma_A': quartic * chi_ac ** 2,
        'sigma_B': quartic * chi_bc ** 2,
    }


def near_resonance_delta_eff(p: SystemParams, chi: ChiMatrix, d_c: complex) -> float:
    """
    Detuning of the omega_a + omega_d -> omega_20 process in the displaced frame,
    -alpha - delta_a - delta_d - 4 alpha |d_C|^2 + chi_AC (1/2 + |d_C|^2).
    """
    n_c = abs(d_c) ** 2
    return (-p.alpha - p.delta_a - p.delta_d - 4.0 * p.alpha * n_c
            + chi['AC'] * (0.5 + n_c))


def near_resonance_ladder(p: SystemParams, chi: ChiMatrix, d_C: complex,
                          delta_eff: Optional[float] = None, sigma_z: int = 1) -> Dict[str, float]:
    """
    Drive-induced nonlinearities near the omega_a + omega_d ~ omega_20 resonance.

    Ratios are scaled by the matching static coefficient. Terms proportional to
    (sigma_z + 1) vanish in the lower two-level state.

    Args:
        p: System parameters
        chi: Static quartic coefficients
        d_C: Classical displacement of the transmon mode
        delta_eff: Override for the effective two-level detuning
        sigma_z: Two-level state, +1 or -1
    """
    if delta_eff is None:
        delta_eff = near_resonance_delta_eff(p, chi, d_C)
    alpha = p.alpha
    n_c = abs(d_C) ** 2
    omega_eff = -math.sqrt(chi['AC'] * chi['CC']) * d_C
    keys = ('chi_AC', 'chi_BC', 'chi_AA', 'chi_AB', 'chi_BB', 'beta_A', 'beta_B',
            'beta_AB', 'beta_BA')
    if n_c == 0:
        out = {k: 0.0 for k in keys}
        out.update({'epsilon_eff': 0.0, 'omega_eff': 0.0, 'delta_eff': float(delta_eff),
                    'convergence': 0.0})
        return out
    if delta_eff == 0:
        raise DomainError("near-resonance ladder diverges at delta_eff = 0")

    small = THRESHOLDS['NEAR_RESONANCE_SMALL'] * alpha
    if abs(delta_eff) >= small or abs(omega_eff) >= small:
        warn_regime(f"two-level restriction needs |delta_eff|, |Omega_eff| << alpha "
                    f"(|delta_eff|={abs(delta_eff):.3g}, |Omega_eff|={abs(omega_eff):.3g})")

    eps = alpha * n_c / delta_eff
    a_ratio = alpha / delta_eff
    ac = chi['AC'] / delta_eff
    bc = chi['BC'] / delta_eff
    upper = sigma_z + 1
    convergence = abs(ac) * max(1.0, abs(eps))
    if convergence >= THRESHOLDS['NEAR_RESONANCE_SMALL']:
        warn_regime(f"near-resonance expansion converges slowly: "
                    f"chi_AC/|delta_eff| max(1, |eps_eff|) = {convergence:.3g}")
    return {
        'chi_AC': -eps,
        'chi_BC': -eps * ac * upper,
        'chi_AA': 16.0 * eps * a_ratio * (1.0 - eps / 2.0),
        'chi_AB': 4.0 * eps * a_ratio,
        'chi_BB': 16.0 * eps * a_ratio * ac * upper,
        'beta_A': 48.0 * eps * ac * a_ratio * (eps ** 2 - 3.0 * eps + 2.0),
        'beta_B': 96.0 * eps * bc * a_ratio * ac * upper,
        'beta_AB': 24.0 * eps * ac * a_ratio * (2.0 - eps),
        'beta_BA': 24.0 * eps * bc * a_ratio,
        'epsilon_eff': eps,
        'omega_eff': omega_eff,
        'delta_eff': float(delta_eff),
        'convergence': convergence,
    }


def _delta_for(p: SystemParams, m: int, delta_method: str, m0: int) -> DriveDelta:
    if delta_method == 'weak_drive':
        return delta_weak_drive(p, m)
    if delta_method == 'tls':
        pair = delta_tls(p, m0)
        if m == m0:
            return pair[0]
        if m == m0 + 1:
            return pair[1]
        return DriveDelta(0.0)
    if delta_method == 'semiclassical':
        return delta_semiclassical(p, m)
    raise ValueError(f"unknown delta_method {delta_method!r}")


def asymptotic_kerr(p: SystemParams, m: int, delta_method: str = 'weak_drive',
                    m0: int = 0) -> Tuple[float, float]:
    """
    Large-detuning asymptotes K_A,m = s_m (delta_a/alpha)^-4 |g_a|^4/alpha^3 and
    K_AB,m = 2 c_m (delta_a delta_b/alpha^2)^-2 |g_a g_b|^2/alpha^3.
    """
    if p.delta_a == 0 or p.delta_b == 0:
        raise DomainError("asymptotic Kerr needs nonzero cavity detunings")
    for x, delta in (('a', p.delta_a), ('b', p.delta_b)):
        if abs(delta) < 10.0 * max(p.alpha, abs(p.delta_d)) and (x == 'a' or p.g_b != 0):
            warn_regime(f"asymptotic Kerr needs |delta_{x}| >> max(alpha, |delta_d|), "
                        f"got {delta:.3g}")
    d = _delta_for(p, m, delta_method, m0)
    alpha = p.alpha
    K_A = d.s * (p.delta_a / alpha) ** -4 * abs(p.g_a) ** 4 / alpha ** 3
    K_AB = (2.0 * d.c * (p.delta_a * p.delta_b / alpha ** 2) ** -2
            * abs(p.g_a * p.g_b) ** 2 / alpha ** 3)
    return float(K_A), float(K_AB)
