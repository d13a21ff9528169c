"""
Configuration constants for drivenkerr.
"""

# Truncations and ramp defaults
DEFAULTS = {
    'ALPHA': 1.0,
    'N_TRANSMON': 12,
    'N_A': 15,
    'N_B': 1,
    'RAMP_STEPS': 64,
    'COUPLING_RAMP_STEPS': 32,
    'MAX_ORDER': 4,
    'K_MAX': 4,
    'THREADS': 1,
    'SEED': 0,
    'LOG_DIR': 'logs',
    # Desk-scale Lindblad sizes
    'LINDBLAD_N_TRANSMON': 8,
    'LINDBLAD_N_A': 12,
    'LINDBLAD_HORIZON_US': 100.0,
    # Fidelity and optimizer
    'CAT_BETA': 3 ** 0.5,
    'BISECTION_ITERATIONS': 60,
    'FIT_SWEEPS': 200,
    'FIT_SPAN': 0.5,
    'FIT_LINE_ITERATIONS': 100,
}

# Numerical tolerances (units of alpha where dimensional)
TOLERANCES = {
    'HERMITICITY': 1e-12,
    'LABEL_GAP': 1e-6,
    'DIVERGENCE': 1e-9,
    'POLE': 1e-9,
    'ROOT': 1e-8,
    'TRACE': 1e-9,
    'POSITIVITY_WARN': -1e-8,
    'POSITIVITY_ABORT': -1e-6,
    'NORM': 1e-10,
    'ODE_RTOL': 1e-8,
    'ODE_ATOL': 1e-10,
    'SECULAR_CUTOFF': 0.02,
    'JUMP_PRUNE': 1e-7,
    'FIT_XTOL': 1e-8,
    'FIT_STEP': 1e-7,
    'FIT_FTOL': 1e-9,
}

# Largest product dimension the coupled builder accepts
DIM_CAP = 2000

# Regime-validity thresholds
THRESHOLDS = {
    'DISPERSIVE_RATIO': 1.0,
    'SEMICLASSICAL_DETUNING': 10.0,
    'NEAR_RESONANCE_SMALL': 0.1,
    'RWA_RATIO': 0.1,
    'WIGNER_RADIUS_FRACTION': 0.25,
    'CAT_TRUNCATION_FRACTION': 1.0 / 3.0,
}

EXIT_CODES = {
    'OK': 0,
    'UNEXPECTED': 1,
    'CONFIG': 2,
    'NUMERICAL': 3,
    'RESONANCE': 4,
}

# Output formatting
CSV_FLOAT_FORMAT = '%.16e'
JSON_INDENT = 2

# Flat keys of a serialized SystemParams
PARAM_KEYS = [
    'alpha_hz', 'delta_a', 'delta_b', 'delta_d',
    'g_a_re', 'g_a_im', 'g_b_re', 'g_b_im',
    'omega_d_re', 'omega_d_im',
    'n_transmon', 'n_a', 'n_b', 'gamma',
]

OPTIONAL_PARAM_KEYS = ['e_c_hz', 'e_j_hz']

# Sweep axes understood by the CLI
SWEEP_AXES = ['delta_a', 'delta_d', 'drive_power', 'g_a']

METHODS = ['weak_coupling', 'modified_weak_coupling', 'full_diag', 'analytic_regime']

DELTA_METHODS = ['weak_drive', 'tls', 'semiclassical']

SUBCOMMANDS = ['spectrum', 'dispersion', 'fulldiag', 'cat', 'rates', 'regimes', 'scan']
