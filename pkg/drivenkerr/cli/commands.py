"""
Subcommand implementations for the drivenkerr command line.

Every command takes the parsed run configuration and an output directory, writes its
datasets there and returns the list of files written. Sweep points are evaluated by
module-level workers so they can be dispatched to a process pool.
"""

import logging
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
import psutil

from ..config import DEFAULTS, DELTA_METHODS, METHODS, SWEEP_AXES
from ..dressing import cross_kerr_from_spectrum, diagonalize_labeled, extract_expansion
from ..dynamics import (
    classical_displacement, coherent_fidelity, displaced_parity_operators,
    escape_rate_perturbative, kappa_gamma_perturbative, lindblad_fidelity, make_cat,
    mean_frequency, optimize_cancellation, phase_scrambling_time, rate_budget, square_grid,
    wigner, wigner_table,
)
from ..errors import ConfigError, DomainError, ResonanceError
from ..floquet import solve_adiabatic
from ..model import SystemParams, with_drive_power
from ..perturbation import (
    cross_kerr, cross_kerr_spectrum, kerr_report, kerr_spectrum, modified_self_kerr,
    resonance_scan, self_kerr, zero_drive_kerr,
)
from ..regimes import (
    asymptotic_kerr, chi_matrix, delta_semiclassical, delta_tls, delta_weak_drive,
    dispersive_chi_ac, participation, sixth_order_corrections, tls_dispersive_coeffs,
    tls_maximum,
)
from ..utils import internal_to_us, to_hz, us_to_internal, write_csv, write_json

logger = logging.getLogger("drivenkerr.cli")


@dataclass
class SweepSpec:
    """One-parameter sweep around a base parameter set."""

    base: SystemParams
    axis: str
    grid: List[float]
    methods: List[str] = field(default_factory=lambda: ['weak_coupling'])
    levels: List[int] = field(default_factory=lambda: [0])

    @classmethod
    def from_config(cls, config: Mapping[str, Any], default_axis: str = 'drive_power',
                    default_methods: Sequence[str] = ('weak_coupling',)) -> "SweepSpec":
        """
        Build the sweep from the ``system``, ``sweep``, ``methods`` and ``levels`` keys.

        Raises:
            ConfigError: On an unknown axis or method, an empty grid or a non-monotone grid
        """
        base = SystemParams.from_config(config.get('system', {}))
        sweep = config.get('sweep', {})
        axis = sweep.get('axis', default_axis)
        if axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis '{axis}'; choose from {SWEEP_AXES}")
        grid = _grid_from(sweep.get('grid'), base, axis)

        methods = list(config.get('methods', default_methods))
        if not methods:
            raise ConfigError("methods list is empty")
        unknown = [m for m in methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {METHODS}")
        levels = [int(m) for m in config.get('levels', [0])]
        return cls(base=base, axis=axis, grid=grid, methods=methods, levels=levels)

    def point(self, value: float) -> SystemParams:
        """Base parameters with the swept axis set to ``value``."""
        if self.axis == 'drive_power':
            return with_drive_power(self.base, value)
        if self.axis == 'g_a':
            return self.base.replace(g_a=complex(value))
        return self.base.replace(**{self.axis: float(value)})


def _grid_from(spec: Any, base: SystemParams, axis: str) -> List[float]:
    if spec is None:
        if axis == 'drive_power':
            return [float(base.drive_power)]
        if axis == 'g_a':
            return [float(abs(base.g_a))]
        return [float(getattr(base, axis))]
    if isinstance(spec, Mapping):
        try:
            lo, hi, n = float(spec['min']), float(spec['max']), int(spec['n'])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"grid needs numeric min, max and n: {str(e)}")
        scale = spec.get('scale', 'linear')
        if n < 1:
            raise ConfigError(f"grid needs n >= 1, got {n}")
        if scale == 'linear':
            grid = np.linspace(lo, hi, n)
        elif scale == 'log':
            if lo <= 0 or hi <= 0:
                raise ConfigError("log grid needs positive bounds")
            grid = np.geomspace(lo, hi, n)
        else:
            raise ConfigError(f"unknown grid scale '{scale}'")
        grid = grid.tolist()
    else:
        try:
            grid = [float(v) for v in spec]
        except (TypeError, ValueError) as e:
            raise ConfigError(f"grid must be a list of numbers: {str(e)}")
    if not grid:
        raise ConfigError("sweep grid is empty")
    steps = np.diff(grid)
    if len(grid) > 1 and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigError("sweep grid must be strictly monotone")
    return grid


def worker_count(threads: Optional[int]) -> int:
    """Pool size: --threads, else the number of physical cores."""
    if threads:
        return max(1, int(threads))
    return psutil.cpu_count(logical=False) or 1


def run_parallel(worker: Callable, tasks: Sequence[Any], threads: Optional[int]) -> List[Any]:
    """Evaluate ``worker`` on every task, preserving task order."""
    workers = min(worker_count(threads), len(tasks)) if tasks else 1
    if workers <= 1:
        return [worker(task) for task in tasks]
    logger.info(f"Dispatching {len(tasks)} sweep points to {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(worker, tasks))


def _report_flags(rows: Sequence[Mapping[str, Any]], abort: bool) -> None:
    flagged = [r for r in rows if r.get('flags')]
    if not flagged:
        return
    print(f"{len(flagged)} evaluation(s) met multiphoton resonances:", file=sys.stderr)
    for r in flagged:
        print(f"  {r['axis_value']:.6g} m={r.get('m', 0)} {r['method']}: {r['flags']}",
              file=sys.stderr)
    if abort:
        raise ResonanceError(f"{len(flagged)} evaluation(s) sit on multiphoton resonances")


# Workers

def _kerr_point(task: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Self- and cross-Kerr of every requested level and method at one sweep point."""
    p = SystemParams.from_config(task['params'])
    rows = []
    sol = None
    spec = None
    for method in task['methods']:
        for m in task['levels']:
            flags = ''
            K_AB = math.nan
            if method == 'weak_coupling':
                sol = sol or solve_adiabatic(p, task['ramp_steps'])
                value = self_kerr(sol, p, m)
                K_A = value.value
                flags = ';'.join(f.label() for f in value.flags)
                if p.n_b > 1 and p.g_b != 0:
                    K_AB = cross_kerr(sol, p, m).value
            elif method == 'modified_weak_coupling':
                value = modified_self_kerr(p, m, ramp_steps=task['ramp_steps'])
                K_A = value.value
                flags = ';'.join(f.label() for f in value.flags)
            elif method == 'full_diag':
                spec = spec or diagonalize_labeled(p, task['coupling_ramp_steps'],
                                                   task['ramp_steps'])
                K_A = extract_expansion(spec, m, 2).kerr
                if spec.dims[2] >= 3:
                    K_AB = cross_kerr_from_spectrum(spec, m)
            else:
                K_A, K_AB = asymptotic_kerr(p, m, task['delta_method'])
            g4 = abs(p.g_a) ** 4
            rows.append({
                'axis_value': task['axis_value'],
                'm': m,
                'method': method,
                'K_A': K_A,
                'K_A_khz': to_hz(K_A, p.alpha_hz) / 1e3,
                'ktilde': K_A * p.alpha ** 3 / g4 if g4 > 0 else math.nan,
                'K_AB': K_AB,
                'flags': flags,
            })
    return rows


def _expansion_point(task: Dict[str, Any]) -> List[Dict[str, Any]]:
    p = SystemParams.from_config(task['params'])
    spec = diagonalize_labeled(p, task['coupling_ramp_steps'], task['ramp_steps'])
    rows = []
    for m in task['levels']:
        expansion = extract_expansion(spec, m, task['max_order'])
        row = {'axis_value': task['axis_value']}
        row.update(expansion.to_dict())
        for name in ('delta_omega', 'kerr', 'beta', 'sigma'):
            row[f"{name}_khz"] = to_hz(row[name], p.alpha_hz) / 1e3
        rows.append(row)
    return rows


def _rates_point(task: Dict[str, Any]) -> Dict[str, Any]:
    p = SystemParams.from_config(task['params'])
    sol = solve_adiabatic(p, task['ramp_steps'])
    spec = diagonalize_labeled(p, task['coupling_ramp_steps'], sol=sol)
    budget = rate_budget(p, sol, spec, task['beta'], task['gamma'])
    row = {'axis_value': task['axis_value'], 'drive_power': p.drive_power}
    row.update(budget.to_dict())
    row['kappa_gamma_perturbative'] = kappa_gamma_perturbative(p, task['gamma'])
    row['escape_1_perturbative'] = escape_rate_perturbative(p, task['gamma'])
    return row


def _common_task(spec: SweepSpec, config: Mapping[str, Any]) -> Dict[str, Any]:
    return {
        'methods': spec.methods,
        'levels': spec.levels,
        'ramp_steps': int(config.get('ramp_steps', DEFAULTS['RAMP_STEPS'])),
        'coupling_ramp_steps': int(config.get('coupling_ramp_steps',
                                              DEFAULTS['COUPLING_RAMP_STEPS'])),
        'delta_method': config.get('delta_method', 'weak_drive'),
    }


def _tasks(spec: SweepSpec, config: Mapping[str, Any], **extra) -> List[Dict[str, Any]]:
    common = _common_task(spec, config)
    if common['delta_method'] not in DELTA_METHODS:
        raise ConfigError(f"unknown delta_method '{common['delta_method']}'")
    common.update(extra)
    return [dict(common, params=spec.point(v).to_config(), axis_value=v) for v in spec.grid]


def _flatten(results: Sequence[List[Dict[str, Any]]]) -> List[Dict[str, Any]]:
    return [row for rows in results for row in rows]


# Commands

def cmd_spectrum(config: Mapping[str, Any], out_dir: str, threads: Optional[int] = None,
                 seed: int = DEFAULTS['SEED']) -> List[str]:
    """Dimensionless self-Kerr spectrum versus delta_a, one series per drive power."""
    spec = SweepSpec.from_config(config, default_axis='delta_a')
    if spec.axis != 'delta_a':
        raise ConfigError(f"spectrum sweeps delta_a, got axis '{spec.axis}'")
    powers = [float(v) for v in config.get('drive_powers', [spec.base.drive_power])]
    frames = []
    for power in powers:
        p = with_drive_power(spec.base, power)
        unit_tasks = []
        for method in spec.methods:
            if method == 'weak_coupling':
                # Coupling-independent, so one transmon solution serves the whole grid
                for m in spec.levels:
                    frame = kerr_spectrum(p, m, spec.grid,
                                          k_max=int(config.get('k_max', DEFAULTS['K_MAX'])))
                    frame.insert(0, 'method', method)
                    frame.insert(0, 'm', m)
                    frame.insert(0, 'drive_power', power)
                    frames.append(frame)
                    if config.get('cross', False) and p.n_b > 1:
                        cross = cross_kerr_spectrum(p, m, spec.grid)
                        cross.insert(0, 'method', 'weak_coupling_cross')
                        cross.insert(0, 'm', m)
                        cross.insert(0, 'drive_power', power)
                        frames.append(cross.rename(columns={'ktilde_ab': 'ktilde'}))
            else:
                unit_tasks.append(method)
        if unit_tasks:
            sweep = SweepSpec(base=p, axis='delta_a', grid=spec.grid, methods=unit_tasks,
                              levels=spec.levels)
            rows = _flatten(run_parallel(_kerr_point, _tasks(sweep, config), threads))
            frame = pd.DataFrame(rows).rename(columns={'axis_value': 'delta_a_over_alpha'})
            frame.insert(0, 'drive_power', power)
            frames.append(frame[['drive_power', 'm', 'method', 'delta_a_over_alpha', 'ktilde']])
    table = pd.concat(frames, ignore_index=True)
    flagged = 0
    if 'flag_condition' in table:
        flagged = int((table['flag_condition'].fillna('') != '').sum())
    if flagged:
        print(f"{flagged} grid point(s) lie next to multiphoton resonances", file=sys.stderr)
        if config.get('abort_on_resonance', False):
            raise ResonanceError(f"{flagged} grid point(s) lie next to multiphoton resonances")
    return [write_csv(table, os.path.join(out_dir, 'spectrum.csv'))]


def cmd_dispersion(config: Mapping[str, Any], out_dir: str, threads: Optional[int] = None,
                   seed: int = DEFAULTS['SEED']) -> List[str]:
    """K_A,m versus the swept parameter for each transmon level, with analytic overlays."""
    spec = SweepSpec.from_config(config)
    rows = _flatten(run_parallel(_kerr_point, _tasks(spec, config), threads))
    _report_flags(rows, config.get('abort_on_resonance', False))
    table = pd.DataFrame(rows)

    overlay = config.get('overlay')
    if overlay:
        if overlay not in DELTA_METHODS:
            raise ConfigError(f"unknown overlay '{overlay}'; choose from {DELTA_METHODS}")
        values = {}
        for v in spec.grid:
            for m in spec.levels:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    try:
                        values[(v, m)] = asymptotic_kerr(spec.point(v), m, overlay)[0]
                    except DomainError:
                        values[(v, m)] = math.nan
        table[f"K_A_{overlay}"] = [values[(v, m)] for v, m in zip(table['axis_value'], table['m'])]
    table = table.rename(columns={'axis_value': spec.axis})
    return [write_csv(table, os.path.join(out_dir, 'dispersion.csv'))]


def decay_exponents(table: pd.DataFrame, axis: str, tail: int) -> Dict[str, float]:
    """Log-log slopes of |K|, |beta|, |sigma| over the last ``tail`` sweep points."""
    last = table.tail(tail)
    x = np.log(last[axis].to_numpy(dtype=float))
    out = {}
    for name in ('kerr', 'beta', 'sigma'):
        y = np.abs(last[name].to_numpy(dtype=float))
        if len(x) >= 2 and np.all(y > 0) and np.all(np.isfinite(x)):
            out[name] = float(np.polyfit(x, np.log(y), 1)[0])
    return out


def cmd_fulldiag(config: Mapping[str, Any], out_dir: str, threads: Optional[int] = None,
                 seed: int = DEFAULTS['SEED']) -> List[str]:
    """Normal-ordered cavity nonlinearities from exact diagonalization across the sweep."""
    spec = SweepSpec.from_config(config, default_methods=('full_diag',))
    max_order = int(config.get('max_order', DEFAULTS['MAX_ORDER']))
    tasks = _tasks(spec, config, max_order=max_order)
    table = pd.DataFrame(_flatten(run_parallel(_expansion_point, tasks, threads)))
    table = table.rename(columns={'axis_value': spec.axis})

    summary = {'axis': spec.axis, 'params': spec.base.to_config(), 'levels': {}}
    tail = int(config.get('slope_tail', 0))
    for m, group in table.groupby('m'):
        entry = {'rows': len(group)}
        if tail >= 2 and spec.axis == 'drive_power':
            entry['decay_exponents'] = decay_exponents(group, spec.axis, tail)
        summary['levels'][int(m)] = entry
    return [write_csv(table, os.path.join(out_dir, 'fulldiag.csv')),
            write_json(summary, os.path.join(out_dir, 'fulldiag.json'))]


def _evolved_cat(spec, cat, t: float) -> np.ndarray:
    """Cat amplitudes at time t in the frame rotating at omega_bar."""
    energies = spec.energies[cat.m, :, 0]
    N = np.arange(len(cat.amplitudes))
    omega_bar = mean_frequency(energies, cat.mean_photon_number)
    return cat.amplitudes * np.exp(-1j * (energies - N * omega_bar) * t)


def cmd_cat(config: Mapping[str, Any], out_dir: str, threads: Optional[int] = None,
            seed: int = DEFAULTS['SEED']) -> List[str]:
    """Cat fidelity trajectories with and without drive, optional decay and Wigner snapshots."""
    base = SystemParams.from_config(config.get('system', {}))
    cat_config = config.get('cat', {})
    beta = complex(cat_config.get('beta', DEFAULTS['CAT_BETA']))
    times_us = np.asarray(cat_config.get('times_us', np.linspace(0.0, 500.0, 101)), dtype=float)
    powers = [float(v) for v in cat_config.get('drive_powers', [base.drive_power])]
    summary: Dict[str, Any] = {'beta': beta, 'runs': []}

    optimize = cat_config.get('optimize')
    if optimize:
        found = optimize_cancellation(base, optimize['grid'], beta=beta)
        summary['cancellation'] = {k: v for k, v in found.items() if k != 'grid'}
        powers.append(found['power_opt'])

    rows = []
    wigner_rows = []
    snapshot_times = [float(v) for v in cat_config.get('wigner_times_us', [])]
    zs = square_grid(float(cat_config.get('wigner_radius', 3.0)),
                     float(cat_config.get('wigner_step', 0.1)))
    rng = np.random.default_rng(seed)
    noise = float(cat_config.get('wigner_noise', 0.0))
    for power in powers:
        p = with_drive_power(base, power)
        spec = diagonalize_labeled(p)
        cat = make_cat(spec, beta)
        t = us_to_internal(times_us, p.alpha_hz)
        for t_us, F in zip(times_us, coherent_fidelity(spec, cat, t)):
            rows.append({'drive_power': power, 'gamma': 0.0, 't_us': t_us, 'F': F})
        expansion = extract_expansion(spec, 0, 3)
        summary['runs'].append({
            'drive_power': power,
            'kerr': expansion.kerr,
            'beta': expansion.beta,
            'tau_ph_us': float(internal_to_us(phase_scrambling_time(expansion.kerr, beta),
                                              p.alpha_hz)),
        })
        if snapshot_times:
            operators = displaced_parity_operators(zs, len(cat.amplitudes))
            for t_us in snapshot_times:
                psi = _evolved_cat(spec, cat, float(us_to_internal(t_us, p.alpha_hz)))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    field_values = wigner(psi, zs, operators)
                if noise > 0:
                    field_values = field_values + rng.normal(0.0, noise, field_values.shape)
                frame = wigner_table(zs, field_values)
                frame.insert(0, 't_us', t_us)
                frame.insert(0, 'drive_power', power)
                wigner_rows.append(frame)

        for gamma in cat_config.get('gammas', []):
            desk = p.replace(
                n_transmon=int(cat_config.get('n_transmon', DEFAULTS['LINDBLAD_N_TRANSMON'])),
                n_a=int(cat_config.get('n_a', DEFAULTS['LINDBLAD_N_A'])), n_b=1)
            horizon = float(cat_config.get('horizon_us', DEFAULTS['LINDBLAD_HORIZON_US']))
            lossy_times = times_us[times_us <= horizon]
            logger.info(f"Lindblad run at power {power:.4g}, gamma {gamma:.4g}")
            lossy = lindblad_fidelity(diagonalize_labeled(desk), beta,
                                      us_to_internal(lossy_times, p.alpha_hz), float(gamma))
            for t_us, F in zip(lossy['t_us'], lossy['F']):
                rows.append({'drive_power': power, 'gamma': float(gamma), 't_us': t_us, 'F': F})

    written = [write_csv(pd.DataFrame(rows), os.path.join(out_dir, 'cat.csv')),
               write_json(summary, os.path.join(out_dir, 'cat.json'))]
    if wigner_rows:
        written.append(write_csv(pd.concat(wigner_rows, ignore_index=True),
                                 os.path.join(out_dir, 'cat_wigner.csv')))
    return written


def cmd_rates(config: Mapping[str, Any], out_dir: str, threads: Optional[int] = None,
              seed: int = DEFAULTS['SEED']) -> List[str]:
    """Golden-rule rate budget versus the swept parameter, with perturbative columns."""
    spec = SweepSpec.from_config(config, default_methods=('full_diag',))
    gamma = float(config.get('gamma', spec.base.gamma))
    beta = complex(config.get('cat', {}).get('beta', DEFAULTS['CAT_BETA']))
    rows = run_parallel(_rates_point, _tasks(spec, config, gamma=gamma, beta=beta), threads)
    for row in rows:
        row[spec.axis] = row.pop('axis_value')
    return [write_json({'axis': spec.axis, 'gamma': gamma, 'rows': rows},
                       os.path.join(out_dir, 'rates.json'))]


def _guarded(fn: Callable, *args) -> Any:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            return fn(*args)
        except DomainError as e:
            return {'error': str(e)}


def regime_summary(p: SystemParams, levels: Sequence[int] = (0, 1)) -> Dict[str, Any]:
    """Every closed-form regime quantity at one parameter point."""
    part = participation(p)
    chi = chi_matrix(part, p.alpha)
    K_A0, K_AB0 = zero_drive_kerr(p) if p.g_a != 0 else (0.0, 0.0)
    return {
        'params': p.to_config(),
        'participation': {'xi_a': part.xi_a, 'xi_b': part.xi_b, 'xi_c': part.xi_c},
        'chi': {''.join(k): v for k, v in chi.chi.items()},
        'chi_ac_dispersive': _guarded(dispersive_chi_ac, p),
        'sixth_order': _guarded(sixth_order_corrections, part, p),
        'tls_dispersive': _guarded(tls_dispersive_coeffs, p),
        'zero_drive_kerr': {'K_A0': K_A0, 'K_AB0': K_AB0},
        'delta_weak_drive': {m: _guarded(lambda q, k: delta_weak_drive(q, k).value, p, m)
                             for m in levels},
        'delta_tls': _guarded(lambda q: [d.value for d in delta_tls(q)], p),
        'tls_maximum': _guarded(tls_maximum, p),
        'delta_semiclassical': {m: _guarded(lambda q, k: delta_semiclassical(q, k).value, p, m)
                                for m in levels},
        'classical_displacement': _guarded(classical_displacement, p),
        'asymptotic_kerr': {m: _guarded(asymptotic_kerr, p, m) for m in levels},
        'kappa_gamma_perturbative': kappa_gamma_perturbative(p),
        'escape_rate_perturbative': escape_rate_perturbative(p),
    }


def cmd_regimes(config: Mapping[str, Any], out_dir: str, threads: Optional[int] = None,
                seed: int = DEFAULTS['SEED']) -> List[str]:
    """Closed-form regime quantities at the configured point as JSON."""
    p = SystemParams.from_config(config.get('system', {}))
    levels = [int(m) for m in config.get('levels', [0, 1])]
    summary = regime_summary(p, levels)
    if config.get('weak_coupling', True) and p.g_a != 0:
        report = kerr_report(p, levels)
        summary['weak_coupling'] = {
            'K_self_a': report.K_self_a, 'K_cross': report.K_cross,
            'flags': {m: [f.label() for f in flags] for m, flags in report.flags.items()},
        }
    return [write_json(summary, os.path.join(out_dir, 'regimes.json'))]


def cmd_scan(config: Mapping[str, Any], out_dir: str, threads: Optional[int] = None,
             seed: int = DEFAULTS['SEED']) -> List[str]:
    """Multiphoton resonance locations in delta_a (and delta_b) as JSON."""
    p = SystemParams.from_config(config.get('system', {}))
    scan = config.get('scan', {})
    ranges = scan.get('ranges', [p.delta_a - 5.0 * p.alpha, p.delta_a + 5.0 * p.alpha])
    if isinstance(ranges, Mapping):
        ranges = {k: tuple(float(x) for x in v) for k, v in ranges.items()}
    else:
        ranges = tuple(float(x) for x in ranges)
    sol = solve_adiabatic(p, int(config.get('ramp_steps', DEFAULTS['RAMP_STEPS'])))
    k_max = int(scan.get('k_max', min(DEFAULTS['K_MAX'], sol.n_levels - 1)))
    hits = resonance_scan(sol, p, ranges, k_max=k_max, m=int(scan.get('m', 0)),
                          min_weight=float(scan.get('min_weight', 0.0)))
    print(f"{len(hits)} multiphoton resonance(s) in range", file=sys.stderr)
    return [write_json({'params': p.to_config(), 'resonances': hits},
                       os.path.join(out_dir, 'scan.json'))]


COMMANDS = {
    'spectrum': cmd_spectrum,
    'dispersion': cmd_dispersion,
    'fulldiag': cmd_fulldiag,
    'cat': cmd_cat,
    'rates': cmd_rates,
    'regimes': cmd_regimes,
    'scan': cmd_scan,
}
