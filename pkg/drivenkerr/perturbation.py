"""
Weak-coupling (fourth-order) cavity Kerr nonlinearities of a driven transmon.

The cavity self- and cross-Kerr conditioned on the driven transmon state psi_m follow from
the quasienergies eps_m and ladder matrix elements c^(+-1)_mn alone, through the tensors

    M^(i,j)_{x,nm} = sum_m' c^(i)_nm' c^(j)_m'm / (eps_mm' - j delta_dx)
    N^(i,j)_{x,nm} = sum_m' c^(i)_nm' c^(j)_m'm / (eps_mm' - j delta_dx)^2

Denominators closer to zero than the divergence tolerance are dropped from the sums and
reported as resonance flags instead of producing huge numbers.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .config import DEFAULTS, TOLERANCES
from .errors import DomainError, InvalidDimensionError
from .floquet import FloquetSolution, solve_adiabatic
from .model import SystemParams

logger = logging.getLogger("drivenkerr.perturbation")

SIGNS = (+1, -1)
CAVITIES = ('a', 'b')


def _sidx(sign: int) -> int:
    return 0 if sign == +1 else 1


@dataclass(frozen=True)
class ResonanceFlag:
    """A dropped near-zero denominator and the resonance condition it belongs to."""

    condition: str
    n: int
    m: int
    j: int
    denominator: float
    cavity: str = 'a'

    def label(self) -> str:
        return f"{self.condition}:n={self.n},m={self.m},j={self.j:+d}"


@dataclass(frozen=True)
class KerrValue:
    """A Kerr coefficient with the resonance flags met while evaluating it."""

    value: float
    flags: Tuple[ResonanceFlag, ...] = ()

    def __float__(self) -> float:
        return float(self.value)

    @property
    def flagged(self) -> bool:
        return bool(self.flags)


@dataclass
class MNTensors:
    """
    M and N tensors per cavity, stored with shape (n, m, i, j) where index 0 of the
    last two axes means +1 and index 1 means -1.
    """

    M: Dict[str, np.ndarray]
    N: Dict[str, np.ndarray]
    detunings: Dict[str, float]
    flags: List[ResonanceFlag] = field(default_factory=list)

    def m_elem(self, cavity: str, n: int, m: int, i: int, j: int) -> complex:
        return self.M[cavity][n, m, _sidx(i), _sidx(j)]

    def n_elem(self, cavity: str, n: int, m: int, i: int, j: int) -> complex:
        return self.N[cavity][n, m, _sidx(i), _sidx(j)]

    def flags_for(self, m: int, cavities: Iterable[str] = CAVITIES) -> Tuple[ResonanceFlag, ...]:
        return tuple(f for f in self.flags if f.m == m and f.cavity in cavities)


@dataclass
class KerrReport:
    """Per-transmon-state self- and cross-Kerr values from one method."""

    method: str
    g_a: complex
    g_b: complex
    alpha: float
    K_self_a: Dict[int, float] = field(default_factory=dict)
    K_self_b: Dict[int, float] = field(default_factory=dict)
    K_cross: Dict[int, float] = field(default_factory=dict)
    flags: Dict[int, Tuple[ResonanceFlag, ...]] = field(default_factory=dict)

    def dimensionless_self(self, m: int, which: str = 'a') -> float:
        """alpha^3 K_{X,m} / |g_x|^4."""
        g = self.g_a if which == 'a' else self.g_b
        table = self.K_self_a if which == 'a' else self.K_self_b
        return self.alpha ** 3 * table[m] / abs(g) ** 4

    def dimensionless_cross(self, m: int) -> float:
        """alpha^3 K_{AB,m} / |g_a g_b|^2."""
        return self.alpha ** 3 * self.K_cross[m] / abs(self.g_a * self.g_b) ** 2


def _c(sol: FloquetSolution, sign: int) -> np.ndarray:
    return sol.c_plus if sign == +1 else sol.c_minus


def _safe_inverse(den: np.ndarray, weight: np.ndarray, power: int = 1):
    """Elementwise weight / den**power with near-zero denominators removed."""
    tol = TOLERANCES['DIVERGENCE']
    small = np.abs(den) < tol
    safe = np.where(small, 1.0, den)
    out = np.where(small, 0.0, weight / safe ** power)
    return out, small


def mn_tensors(sol: FloquetSolution, p: SystemParams,
               shifts: Optional[Dict[str, float]] = None) -> MNTensors:
    """
    Assemble the M and N tensors for both cavities.

    Args:
        sol: Driven transmon solution consistent with ``p``
        p: System parameters
        shifts: Optional additive shifts of delta_a / delta_b in the denominators

    Returns:
        MNTensors with divergent entries flagged (condition ii)
    """
    shifts = shifts or {}
    eps = sol.quasienergies
    n = sol.n_levels
    # eps_mm' laid out as [m', m]
    eps_diff = eps[np.newaxis, :] - eps[:, np.newaxis]
    detunings = {
        'a': p.delta_d - (p.delta_a + shifts.get('a', 0.0)),
        'b': p.delta_d - (p.delta_b + shifts.get('b', 0.0)),
    }
    M, N, flags = {}, {}, []
    for cavity, delta_dx in detunings.items():
        M[cavity] = np.zeros((n, n, 2, 2), dtype=complex)
        N[cavity] = np.zeros((n, n, 2, 2), dtype=complex)
        for j in SIGNS:
            cj = _c(sol, j)
            den = eps_diff - j * delta_dx
            first, small = _safe_inverse(den, cj, 1)
            second, _ = _safe_inverse(den, cj, 2)
            for m_prime, m in zip(*np.nonzero(small & (np.abs(cj) > 0))):
                flags.append(ResonanceFlag('ii', int(m_prime), int(m), j,
                                           float(den[m_prime, m]), cavity))
            for i in SIGNS:
                ci = _c(sol, i)
                M[cavity][:, :, _sidx(i), _sidx(j)] = ci @ first
                N[cavity][:, :, _sidx(i), _sidx(j)] = ci @ second
    return MNTensors(M=M, N=N, detunings=detunings, flags=flags)


def _mixed(t: MNTensors, cavity: str, tensor: str = 'M') -> np.ndarray:
    """M^(+1,-1) + M^(-1,+1) (or the N analogue) as an (n, m) matrix."""
    arr = t.M[cavity] if tensor == 'M' else t.N[cavity]
    return arr[:, :, 0, 1] + arr[:, :, 1, 0]


def _self_kerr_bracket(sol: FloquetSolution, t: MNTensors, m: int,
                       which: str) -> Tuple[float, List[ResonanceFlag]]:
    """Value of K_{X,m} / (2 |g_x|^4) and flags raised while summing it."""
    tol = TOLERANCES['DIVERGENCE']
    eps = sol.quasienergies
    delta = t.detunings[which]
    flags = []
    total = 0.0

    for j in SIGNS:
        amp = np.abs(t.M[which][:, m, _sidx(j), _sidx(j)]) ** 2
        for n in range(sol.n_levels):
            den = eps[m] - eps[n] - 2 * j * delta
            if abs(den) < tol:
                if amp[n] > 0:
                    flags.append(ResonanceFlag('i', n, m, j, float(den), which))
                continue
            total += amp[n] / den

    mixed = _mixed(t, which, 'M')
    for n in range(sol.n_levels):
        if n == m:
            continue
        den = eps[m] - eps[n]
        weight = abs(mixed[n, m]) ** 2
        if abs(den) < tol:
            if weight > 0:
                flags.append(ResonanceFlag('degenerate', n, m, 0, float(den), which))
            continue
        total += weight / den

    total -= float(np.real(mixed[m, m] * _mixed(t, which, 'N')[m, m]))
    return float(total), flags


def _cross_kerr_bracket(sol: FloquetSolution, t: MNTensors,
                        m: int) -> Tuple[float, List[ResonanceFlag]]:
    """Value of K_{AB,m} / |g_a g_b|^2."""
    tol = TOLERANCES['DIVERGENCE']
    eps = sol.quasienergies
    d_a, d_b = t.detunings['a'], t.detunings['b']
    flags = []
    total = 0.0

    for j in SIGNS:
        both = np.abs(t.M['a'][:, m, _sidx(j), _sidx(j)] + t.M['b'][:, m, _sidx(j), _sidx(j)]) ** 2
        swap = np.abs(t.M['a'][:, m, _sidx(j), _sidx(-j)]
                      + t.M['b'][:, m, _sidx(-j), _sidx(j)]) ** 2
        for n in range(sol.n_levels):
            eps_mn = eps[m] - eps[n]
            den_sum = eps_mn - j * (d_a + d_b)
            den_diff = eps_mn + j * (d_a - d_b)
            if abs(den_sum) < tol:
                if both[n] > 0:
                    flags.append(ResonanceFlag('iii', n, m, j, float(den_sum), 'ab'))
            else:
                total += both[n] / den_sum
            if abs(den_diff) < tol:
                if swap[n] > 0:
                    flags.append(ResonanceFlag('iv', n, m, j, float(den_diff), 'ab'))
            else:
                total += swap[n] / den_diff

    mixed_a = _mixed(t, 'a', 'M')
    mixed_b = _mixed(t, 'b', 'M')
    for n in range(sol.n_levels):
        if n == m:
            continue
        den = eps[m] - eps[n]
        weight = mixed_a[n, m] * np.conj(mixed_b[n, m])
        if abs(den) < tol:
            if abs(weight) > 0:
                flags.append(ResonanceFlag('degenerate', n, m, 0, float(den), 'ab'))
            continue
        total += 2.0 * float(np.real(weight)) / den

    total -= float(np.real(mixed_a[m, m] * _mixed(t, 'b', 'N')[m, m]))
    total -= float(np.real(mixed_b[m, m] * _mixed(t, 'a', 'N')[m, m]))
    return float(total), flags


def _check_level(sol: FloquetSolution, m: int) -> None:
    if not 0 <= m < sol.n_levels:
        raise InvalidDimensionError(f"transmon label {m} outside truncation {sol.n_levels}")


def self_kerr(sol: FloquetSolution, p: SystemParams, m: int, which: str = 'a',
              tensors: Optional[MNTensors] = None) -> KerrValue:
    """
    Weak-coupling self-Kerr K_{X,m} of cavity ``which`` with the transmon in psi_m.

    Args:
        sol: Driven transmon solution
        p: System parameters
        m: Transmon label
        which: 'a' or 'b'
        tensors: Precomputed tensors (reused across calls)

    Returns:
        KerrValue carrying any resonance flags
    """
    _check_level(sol, m)
    if which not in CAVITIES:
        raise ValueError(f"cavity must be 'a' or 'b', got {which!r}")
    t = tensors if tensors is not None else mn_tensors(sol, p)
    bracket, flags = _self_kerr_bracket(sol, t, m, which)
    g = p.g_a if which == 'a' else p.g_b
    flags = list(t.flags_for(m, (which,))) + flags
    if flags:
        logger.warning(f"self-Kerr K_{which.upper()},{m} near resonance: "
                       f"{', '.join(f.label() for f in flags)}")
    return KerrValue(2.0 * abs(g) ** 4 * bracket, tuple(flags))


def cross_kerr(sol: FloquetSolution, p: SystemParams, m: int,
               tensors: Optional[MNTensors] = None) -> KerrValue:
    """Weak-coupling cross-Kerr K_{AB,m} between cavities a and b."""
    _check_level(sol, m)
    t = tensors if tensors is not None else mn_tensors(sol, p)
    bracket, flags = _cross_kerr_bracket(sol, t, m)
    flags = list(t.flags_for(m)) + flags
    if flags:
        logger.warning(f"cross-Kerr K_AB,{m} near resonance: "
                       f"{', '.join(f.label() for f in flags)}")
    return KerrValue(abs(p.g_a * p.g_b) ** 2 * bracket, tuple(flags))


def zero_drive_kerr(p: SystemParams) -> Tuple[float, float]:
    """
    Closed-form K_{A,0} and K_{AB,0} with the transmon in its ground state and no drive.

    Raises:
        DomainError: If a denominator vanishes
    """
    alpha, da, db = p.alpha, p.delta_a, p.delta_b
    if da == 0 or 2 * da + alpha == 0:
        raise DomainError(f"zero-drive self-Kerr undefined at delta_a = {da}")
    K_A0 = -2.0 * abs(p.g_a) ** 4 * alpha / (da ** 3 * (2 * da + alpha))
    if p.g_b == 0:
        return K_A0, 0.0
    if db == 0 or da + db + alpha == 0:
        raise DomainError(f"zero-drive cross-Kerr undefined at delta_a={da}, delta_b={db}")
    K_AB0 = (-abs(p.g_a * p.g_b) ** 2 * 2.0 * alpha * (da + db)
             / (da ** 2 * db ** 2 * (da + db + alpha)))
    return K_A0, K_AB0


def kerr_report(p: SystemParams, levels: Sequence[int] = (0, 1),
                method: str = 'weak_coupling', sol: Optional[FloquetSolution] = None,
                ramp_steps: int = DEFAULTS['RAMP_STEPS']) -> KerrReport:
    """Evaluate self- and cross-Kerr for several transmon states with one weak-coupling method."""
    report = KerrReport(method=method, g_a=p.g_a, g_b=p.g_b, alpha=p.alpha)
    for m in levels:
        if method == 'weak_coupling':
            solution = sol if sol is not None else solve_adiabatic(p, ramp_steps)
            tensors = mn_tensors(solution, p)
        elif method == 'modified_weak_coupling':
            solution = modified_solution(p, ramp_steps)
            shifts = coupling_shifts(p, m)
            tensors = mn_tensors(solution, p, {'a': shifts['c10'], 'b': shifts['c01']})
        else:
            raise ValueError(f"kerr_report handles weak-coupling methods only, got {method!r}")
        k_a = self_kerr(solution, p, m, 'a', tensors)
        flags = list(k_a.flags)
        report.K_self_a[m] = k_a.value
        if p.g_b != 0:
            k_b = self_kerr(solution, p, m, 'b', tensors)
            k_ab = cross_kerr(solution, p, m, tensors)
            report.K_self_b[m] = k_b.value
            report.K_cross[m] = k_ab.value
            flags += list(k_b.flags) + list(k_ab.flags)
        report.flags[m] = tuple(flags)
    return report


def kerr_to_chi3(K: float, g: Union[complex, Tuple[complex, complex]]) -> float:
    """
    Re chi^(3) of the driven ancilla from a cavity Kerr, K = -lambda^4 Re chi^(3) with
    lambda = |g| (hbar = 1). Pass (g_a, g_b) for a cross-Kerr.
    """
    if isinstance(g, tuple):
        scale = abs(g[0] * g[1]) ** 2
    else:
        scale = abs(g) ** 4
    if scale == 0:
        raise DomainError("coupling must be nonzero to convert Kerr to chi^(3)")
    return -K / scale


def _resonance_locations(sol: FloquetSolution, p: SystemParams, m: int, k_max: int,
                         conditions: Sequence[str]):
    """Linear roots of each condition in delta_a (the solution does not depend on delta_a)."""
    skip = sol.untrusted
    for n in range(sol.n_levels):
        if n in skip or abs(n - m) > k_max:
            continue
        eps_mn = sol.eps(m, n)
        for j in SIGNS:
            if 'i' in conditions:
                yield 'i', n, j, p.delta_d - eps_mn / (2 * j)
            if 'ii' in conditions:
                # n plays the intermediate level m' of the M tensor
                yield 'ii', n, j, p.delta_d - sol.eps(m, n) / j
            if 'iii' in conditions:
                yield 'iii', n, j, p.delta_d + p.delta_db - eps_mn / j
            if 'iv' in conditions:
                yield 'iv', n, j, p.delta_b + eps_mn / j


def _resonance_weight(sol: FloquetSolution, p: SystemParams, condition: str,
                      n: int, m: int, j: int, delta_a: float) -> float:
    if condition == 'ii':
        return float(abs(_c(sol, j)[n, m]) ** 2)
    t = mn_tensors(sol, p.replace(delta_a=delta_a, g_a=0.0, g_b=0.0))
    if condition == 'i':
        return float(abs(t.m_elem('a', n, m, j, j)) ** 2)
    if condition == 'iii':
        return float(abs(t.m_elem('a', n, m, j, j) + t.m_elem('b', n, m, j, j)) ** 2)
    return float(abs(t.m_elem('a', n, m, j, -j) + t.m_elem('b', n, m, -j, j)) ** 2)


def resonance_scan(sol: FloquetSolution, p: SystemParams,
                   ranges: Union[Tuple[float, float], Dict[str, Tuple[float, float]]],
                   k_max: int = DEFAULTS['K_MAX'], m: int = 0,
                   conditions: Sequence[str] = ('i', 'ii', 'iii', 'iv'),
                   min_weight: float = 0.0) -> List[Dict]:
    """
    Locate multiphoton resonances in the cavity-a detuning.

    Conditions (Stark-shifted, delta units):
        i)   eps_mn = 2 j delta_da        ii)  eps_mm' = j delta_da
        iii) eps_mn = j (delta_da + delta_db)   iv) eps_mn = j (delta_db - delta_da)

    Args:
        sol: Driven transmon solution
        p: System parameters (delta_b fixed for iii and iv)
        ranges: (lo, hi) in delta_a, or {'delta_a': (lo, hi)}
        k_max: Largest |n - m| considered
        m: Transmon label of interest
        conditions: Subset of condition names
        min_weight: Drop roots whose resonance matrix-element weight is smaller

    Returns:
        List of dicts sorted by location
    """
    if k_max > sol.n_levels - 1:
        raise InvalidDimensionError(f"k_max {k_max} exceeds n_transmon - 1 = {sol.n_levels - 1}")
    lo, hi = ranges['delta_a'] if isinstance(ranges, dict) else ranges
    if (p.g_b == 0 and p.n_b == 1):
        conditions = [c for c in conditions if c in ('i', 'ii')]
    hits = []
    for condition, n, j, location in _resonance_locations(sol, p, m, k_max, conditions):
        if not lo <= location <= hi:
            continue
        weight = _resonance_weight(sol, p, condition, n, m, j, location)
        if weight < min_weight or (min_weight > 0 and weight == 0):
            continue
        hits.append({
            'condition': condition, 'n': n, 'm': m, 'j': j,
            'variable': 'delta_a', 'location': float(location), 'weight': weight,
        })
    hits.sort(key=lambda h: (h['location'], h['condition'], h['n'], h['j']))
    logger.info(f"Resonance scan found {len(hits)} roots in [{lo}, {hi}]")
    return hits


def kerr_spectrum(p: SystemParams, m: int, delta_a_grid: Sequence[float],
                  sol: Optional[FloquetSolution] = None, k_max: int = DEFAULTS['K_MAX'],
                  min_weight: float = 1e-12) -> pd.DataFrame:
    """
    Dimensionless self-Kerr alpha^3 K_{A,m}/|g_a|^4 over a grid of cavity detunings.

    The FloquetSolution is computed once and reused for every point. A grid point is
    flagged when a weighted resonance (conditions i, ii) lies between it and the next point,
    or when a divergent term was dropped at that point.
    """
    grid = np.asarray(delta_a_grid, dtype=float)
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        raise ValueError("delta_a grid must be finite and nonempty")
    solution = sol if sol is not None else solve_adiabatic(p)
    # the bracket is coupling independent
    unit = p.replace(g_a=0.0, g_b=0.0, n_b=1)
    rows = []
    for delta_a in grid:
        q = unit.replace(delta_a=float(delta_a))
        tensors = mn_tensors(solution, q)
        bracket, flags = _self_kerr_bracket(solution, tensors, m, 'a')
        flags = list(tensors.flags_for(m, ('a',))) + flags
        rows.append({
            'delta_a_over_alpha': delta_a / p.alpha,
            'ktilde': 2.0 * p.alpha ** 3 * bracket,
            'flag_condition': flags[0].condition if flags else '',
            'flag_nm': f"{flags[0].n},{flags[0].m},{flags[0].j:+d}" if flags else '',
        })
    frame = pd.DataFrame(rows)

    if grid.size > 1:
        hits = resonance_scan(solution, unit, (float(grid.min()), float(grid.max())),
                              k_max=min(k_max, solution.n_levels - 1), m=m,
                              conditions=('i', 'ii'), min_weight=min_weight)
        order = np.argsort(grid)
        for hit in hits:
            below = order[np.searchsorted(grid[order], hit['location'], side='right') - 1]
            if frame.at[below, 'flag_condition'] == '':
                frame.at[below, 'flag_condition'] = hit['condition']
                frame.at[below, 'flag_nm'] = f"{hit['n']},{hit['m']},{hit['j']:+d}"
    return frame


def cross_kerr_spectrum(p: SystemParams, m: int, delta_a_grid: Sequence[float],
                        sol: Optional[FloquetSolution] = None) -> pd.DataFrame:
    """Dimensionless cross-Kerr alpha^3 K_{AB,m}/|g_a g_b|^2 versus delta_a at fixed delta_b."""
    solution = sol if sol is not None else solve_adiabatic(p)
    unit = p.replace(g_a=0.0, g_b=0.0)
    rows = []
    for delta_a in np.asarray(delta_a_grid, dtype=float):
        tensors = mn_tensors(solution, unit.replace(delta_a=float(delta_a)))
        bracket, flags = _cross_kerr_bracket(solution, tensors, m)
        flags = list(tensors.flags_for(m)) + flags
        rows.append({
            'delta_a_over_alpha': delta_a / p.alpha,
            'ktilde_ab': p.alpha ** 3 * bracket,
            'flag_condition': flags[0].condition if flags else '',
            'flag_nm': f"{flags[0].n},{flags[0].m},{flags[0].j:+d}" if flags else '',
        })
    return pd.DataFrame(rows)


def linear_susceptibility(sol: FloquetSolution, p: SystemParams,
                          omega_grid: Sequence[float], m: int = 0) -> pd.DataFrame:
    """
    Linear susceptibility chi_m(omega; omega) of the driven transmon under the RWA.

    Probe frequencies are given as delta_p = omega - omega_10 (units of alpha):

        chi_m = sum_n |c^-_mn|^2 / (delta_d - delta_p + eps_nm)
                    - |c^-_nm|^2 / (delta_d - delta_p + eps_mn)

    Terms with |denominator| below the pole tolerance are dropped and the point flagged.
    """
    _check_level(sol, m)
    tol = TOLERANCES['POLE']
    eps = sol.quasienergies
    w_up = np.abs(sol.c_minus[m, :]) ** 2
    w_down = np.abs(sol.c_minus[:, m]) ** 2
    rows = []
    for delta_p in np.asarray(omega_grid, dtype=float):
        den_up = p.delta_d - delta_p + (eps - eps[m])
        den_down = p.delta_d - delta_p + (eps[m] - eps)
        up, small_up = _safe_inverse(den_up, w_up)
        down, small_down = _safe_inverse(den_down, w_down)
        pole = bool(np.any(small_up & (w_up > 0)) or np.any(small_down & (w_down > 0)))
        chi = complex(np.sum(up) - np.sum(down))
        rows.append({'delta_p': delta_p, 'chi_re': chi.real, 'chi_im': chi.imag, 'pole': pole})
    return pd.DataFrame(rows)


def cavity_pull(sol: FloquetSolution, p: SystemParams, m: int = 0, which: str = 'a') -> float:
    """Ancilla-induced cavity frequency shift -|g|^2 chi_m at the cavity frequency."""
    g, delta = (p.g_a, p.delta_a) if which == 'a' else (p.g_b, p.delta_b)
    chi = linear_susceptibility(sol, p, [delta], m)
    return float(-abs(g) ** 2 * chi['chi_re'].iloc[0])


def coupling_shifts(p: SystemParams, m: int) -> Dict[str, float]:
    """
    Zero-drive, second-order coupling-induced frequency shifts.

    Returns c10 and c01 (cavity a and b pulls with the transmon in |m>) and c00 (shift
    of transmon level m).

    Raises:
        DomainError: When a denominator vanishes, naming the level and cavity
    """
    alpha = p.alpha
    shifts = {'c10': 0.0, 'c01': 0.0, 'c00': 0.0}
    for cavity, key, g, delta in (('a', 'c10', p.g_a, p.delta_a), ('b', 'c01', p.g_b, p.delta_b)):
        if g == 0:
            continue
        if m == 0:
            # the (delta - alpha) factor cancels against the lower denominator
            if delta == 0:
                raise DomainError(f"coupling shift undefined for m=0, cavity {cavity}")
            shifts[key] = abs(g) ** 2 / delta
            continue
        den_pull = (delta + m * alpha) * (delta + (m - 1) * alpha)
        den_level = delta + (m - 1) * alpha
        if den_pull == 0:
            raise DomainError(f"coupling shift undefined for m={m}, cavity {cavity}")
        shifts[key] = abs(g) ** 2 * (delta - alpha) / den_pull
        shifts['c00'] -= abs(g) ** 2 * m / den_level
    return shifts


def modified_solution(p: SystemParams, ramp_steps: int = DEFAULTS['RAMP_STEPS']) -> FloquetSolution:
    """
    Driven transmon solved with the coupling-induced level shifts c00_m added to H_anc.

    Equal to solve_adiabatic when both couplings vanish.
    """
    levels = np.array([coupling_shifts(p, m)['c00'] for m in range(p.n_transmon)])
    logger.debug(f"Modified transmon level shifts: {levels[:4]}")
    return solve_adiabatic(p, ramp_steps, extra_diagonal=levels)


def modified_self_kerr(p: SystemParams, m: int, which: str = 'a',
                       ramp_steps: int = DEFAULTS['RAMP_STEPS'],
                       sol: Optional[FloquetSolution] = None) -> KerrValue:
    """Self-Kerr from the modified solution with shifted cavity detunings."""
    solution = sol if sol is not None else modified_solution(p, ramp_steps)
    shifts = coupling_shifts(p, m)
    tensors = mn_tensors(solution, p, {'a': shifts['c10'], 'b': shifts['c01']})
    return self_kerr(solution, p, m, which, tensors)


def modified_cross_kerr(p: SystemParams, m: int, ramp_steps: int = DEFAULTS['RAMP_STEPS'],
                        sol: Optional[FloquetSolution] = None) -> KerrValue:
    """Cross-Kerr from the modified solution with shifted cavity detunings."""
    solution = sol if sol is not None else modified_solution(p, ramp_steps)
    shifts = coupling_shifts(p, m)
    tensors = mn_tensors(solution, p, {'a': shifts['c10'], 'b': shifts['c01']})
    return cross_kerr(solution, p, m, tensors)
