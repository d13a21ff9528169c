#!/usr/bin/env python3
"""
Tests for the closed-form regime formulas.
"""

import math
import os
import sys
import unittest
import warnings

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from drivenkerr.errors import DomainError, RegimeWarning
from drivenkerr.floquet import solve_adiabatic
from drivenkerr.model import SystemParams, with_drive_power
from drivenkerr.perturbation import self_kerr
from drivenkerr.regimes import (
    asymptotic_kerr, chi_matrix, delta_semiclassical, delta_tls, delta_weak_drive,
    dispersive_chi_ac, near_resonance_ladder, participation, semiclassical_expansion,
    sixth_order_corrections, stark_expansion, tls_dispersive_coeffs, tls_dispersive_energy,
    tls_maximum, tls_nonlinearity_ladder, tls_series_coefficient,
)


class TestStaticCoefficients(unittest.TestCase):
    """Eigenmode participations, chi matrix and the two-level dispersive Hamiltonian."""

    def setUp(self):
        self.p = SystemParams(delta_a=10.0, delta_b=6.0, g_a=1.0, g_b=0.5)

    def test_chi_matrix(self):
        chi = chi_matrix(participation(self.p), self.p.alpha)
        self.assertAlmostEqual(chi['AA'], 1e-4)
        self.assertAlmostEqual(chi['CC'], 1.0)
        self.assertAlmostEqual(chi['AC'], 0.02)
        self.assertAlmostEqual(chi['CA'], chi['AC'])
        self.assertAlmostEqual(chi[('A', 'B')], 2.0 * 0.01 * (0.5 / 6.0) ** 2)

    def test_sixth_order_shapes(self):
        out = sixth_order_corrections(participation(self.p), self.p)
        self.assertEqual(set(out['epsilon']), {'AA', 'BB', 'CC', 'AC', 'BC', 'AB'})
        self.assertEqual(set(out['beta']), {'A', 'B', 'AB', 'BA'})
        self.assertAlmostEqual(out['epsilon']['AA'], 0.9)

    def test_sixth_order_skew_divergence(self):
        p = self.p.replace(delta_b=20.0)
        with self.assertRaises(DomainError):
            sixth_order_corrections(participation(p), p)

    def test_dispersive_chi_ac(self):
        self.assertAlmostEqual(dispersive_chi_ac(self.p), 2.0 / 110.0)
        self.assertAlmostEqual(dispersive_chi_ac(self.p, 'b'), 0.5 / 42.0)
        far = SystemParams(delta_a=1000.0, g_a=10.0)
        self.assertAlmostEqual(dispersive_chi_ac(far) / 2e-4, 1.0, delta=2e-3)
        self.assertEqual(dispersive_chi_ac(self.p.replace(g_a=0.0)), 0.0)
        with self.assertRaises(DomainError):
            dispersive_chi_ac(self.p.replace(delta_a=-1.0))

    def test_tls_dispersive_coeffs(self):
        k = tls_dispersive_coeffs(self.p)
        self.assertAlmostEqual(k['lamb_a'], 0.1)
        self.assertAlmostEqual(k['kerr_a'], 1e-3)
        self.assertAlmostEqual(k['lamb_b'], 0.25 / 6.0)
        self.assertAlmostEqual(k['kerr_b'], 0.0625 / 216.0)
        self.assertAlmostEqual(k['cross'], 8.0 / 3600.0)
        # Second difference in N_A isolates the quartic term
        E = [tls_dispersive_energy(self.p, -1, n) for n in range(3)]
        self.assertAlmostEqual(E[2] - 2.0 * E[1] + E[0], -2e-3)

    def test_tls_kerr_changes_sign_with_state(self):
        """The quartic term enters with opposite signs in the two transmon states."""
        p = SystemParams(delta_a=2.0, g_a=0.1)
        lamb, kerr = 0.01 / 2.0, 1e-4 / 8.0
        for N in range(4):
            split = tls_dispersive_energy(p, 1, N) - tls_dispersive_energy(p, -1, N)
            self.assertAlmostEqual(split, -lamb * (1 + 2 * N) + 2 * kerr * N ** 2)
        with self.assertRaises(ValueError):
            tls_dispersive_energy(p, 0, 1)


class TestDriveMultiplier(unittest.TestCase):
    """Delta_m in the weak-drive, two-level and semiclassical limits."""

    def test_weak_drive(self):
        p = SystemParams(delta_d=2.0, omega_d=0.1)
        self.assertAlmostEqual(delta_weak_drive(p, 0).value, 8.0 * 0.01 / 8.0)
        self.assertAlmostEqual(delta_weak_drive(p, 1).value, 8.0 * 0.01 * (2 / 27.0 - 1 / 8.0))
        self.assertEqual(delta_weak_drive(p.replace(omega_d=0.0), 0).value, 0.0)
        with self.assertRaises(DomainError):
            delta_weak_drive(p.replace(delta_d=-1.0), 1)

    def test_tls_pair_is_antisymmetric(self):
        p = SystemParams(delta_d=-0.2, omega_d=0.05)
        lower, upper = delta_tls(p)
        self.assertAlmostEqual(lower.value, -upper.value)
        self.assertLess(lower.value, 0.0)

    def test_tls_maximum(self):
        detuning = 0.1
        out = tls_maximum(SystemParams(delta_d=detuning))
        self.assertAlmostEqual(out['max_value'], 4.0 / math.sqrt(27.0) / detuning)
        self.assertAlmostEqual(out['numeric_max_value'] / out['max_value'], 1.0, places=6)
        self.assertAlmostEqual(out['numeric_maximizer'] / out['closed_form_maximizer'], 1.0,
                               delta=1e-4)
        self.assertAlmostEqual(out['stated_maximizer'], detuning / 2.0)

    def test_semiclassical_weak_drive_limit(self):
        """Far detuned and weakly driven, semiclassical Delta_0 approaches the weak-drive one."""
        p = SystemParams(delta_d=30.0, omega_d=0.3)
        np.testing.assert_allclose(delta_semiclassical(p, 0).value,
                                   delta_weak_drive(p, 0).value, rtol=0.02)

    def test_semiclassical_saturation(self):
        p = SystemParams(delta_d=101.0, omega_d=1e7)
        self.assertAlmostEqual(delta_semiclassical(p, 0).value, 8.0 / 3.0, delta=5e-3)

    def test_semiclassical_warns_out_of_regime(self):
        with self.assertWarns(RegimeWarning):
            delta_semiclassical(SystemParams(delta_d=3.0, omega_d=1.0), 0)

    def test_semiclassical_needs_positive_detuning(self):
        with self.assertRaises(DomainError):
            delta_semiclassical(SystemParams(delta_d=0.5, omega_d=1.0), 0)

    def test_semiclassical_expansion_undriven(self):
        out = semiclassical_expansion(SystemParams(delta_d=3.0), third_order=True)
        self.assertEqual(out['Q0'], 0.0)
        np.testing.assert_allclose(out['g0_coeffs'], [0.0, 0.0, 0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(out['nu0_coeffs'], [1.0, 1.0, 0.0], atol=1e-15)

    def test_semiclassical_expansion_driven(self):
        out = semiclassical_expansion(SystemParams(delta_d=3.0, omega_d=0.5))
        q0 = out['Q0']
        drive = 0.5 * math.sqrt(1.0 / 8.0)
        self.assertAlmostEqual(q0 * (q0 ** 2 + 1.0), drive, places=10)
        self.assertAlmostEqual(q0, 0.1717, delta=1e-3)
        self.assertEqual(len(out['g0_coeffs']), 3)
        self.assertAlmostEqual(out['nu0_coeffs'][0] ** 2, (1.0 + 3.0 * q0 ** 2) * (1.0 + q0 ** 2))


class TestLadders(unittest.TestCase):
    """ac Stark and two-level nonlinearity ladders."""

    def setUp(self):
        self.p = SystemParams(delta_a=10.0, g_a=0.2, delta_d=0.05)
        self.chi = chi_matrix(participation(self.p), self.p.alpha)

    def test_stark_expansion_leading_term(self):
        p = SystemParams(delta_d=2.0, omega_d=0.1, n_transmon=8)
        coefficients = stark_expansion(p, 0, 0.0, order=2)
        self.assertAlmostEqual(coefficients[0], 0.01 / 2.0)
        self.assertAlmostEqual(coefficients[1], -0.01 / 4.0)
        self.assertAlmostEqual(solve_adiabatic(p).quasienergies[0], coefficients[0], delta=1e-4)

    def test_series_coefficients(self):
        delta, tilde = 0.3, 0.5
        r = delta / tilde
        self.assertAlmostEqual(tls_series_coefficient(1, delta, tilde), r)
        self.assertAlmostEqual(tls_series_coefficient(2, delta, tilde), (1 - r ** 2) / 2)
        self.assertAlmostEqual(tls_series_coefficient(3, delta, tilde), -r * (1 - r ** 2) / 2)

    def test_large_drive_decay_laws(self):
        """chi decays as |Omega|^-1 while beta and sigma both decay as |Omega|^-3."""
        low = tls_nonlinearity_ladder(self.p.replace(omega_d=100 * 0.05), 0, self.chi)
        high = tls_nonlinearity_ladder(self.p.replace(omega_d=10000 * 0.05), 0, self.chi)

        def slope(key):
            return math.log(abs(high[key] / low[key])) / math.log(100.0)

        self.assertAlmostEqual(slope('chi_AA'), -1.0, delta=0.1)
        self.assertAlmostEqual(slope('beta_A'), -3.0, delta=0.1)
        self.assertAlmostEqual(slope('sigma_A'), -3.0, delta=0.1)

    def test_undriven_ladder_is_zero(self):
        out = tls_nonlinearity_ladder(self.p, 0, self.chi)
        self.assertTrue(all(v == 0.0 for v in out.values()))

    def test_near_resonance_fractional_change(self):
        """epsilon_eff = 0.5 and alpha/delta_eff = 50 give a 300-fold chi_AA change."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = near_resonance_ladder(self.p, self.chi, 0.1, delta_eff=0.02)
            lower = near_resonance_ladder(self.p, self.chi, 0.1, delta_eff=0.02, sigma_z=-1)
        self.assertAlmostEqual(out['epsilon_eff'], 0.5)
        self.assertAlmostEqual(out['chi_AA'], 300.0)
        self.assertAlmostEqual(out['chi_AB'], 100.0)
        self.assertEqual(lower['chi_BB'], 0.0)

    def test_near_resonance_without_displacement(self):
        out = near_resonance_ladder(self.p, self.chi, 0.0)
        self.assertEqual(out['chi_AA'], 0.0)


class TestAsymptoticKerr(unittest.TestCase):
    """Large-detuning asymptotes against the weak-coupling sums."""

    def test_matches_weak_coupling(self):
        base = SystemParams(delta_a=200.0, g_a=1.0, delta_d=10.0)
        for power in (0.0, 0.1):
            p = with_drive_power(base, power)
            K_asym, _ = asymptotic_kerr(p, 0, 'weak_drive')
            K = self_kerr(solve_adiabatic(p), p, 0).value
            self.assertAlmostEqual(K_asym / K, 1.0, delta=0.05, msg=f"power={power}")

    def test_unknown_method(self):
        with self.assertRaises(ValueError):
            asymptotic_kerr(SystemParams(delta_a=200.0, g_a=1.0), 0, 'exact')

    def test_warns_close_to_transmon(self):
        with self.assertWarns(RegimeWarning):
            asymptotic_kerr(SystemParams(delta_a=5.0, g_a=0.1), 0)


if __name__ == '__main__':
    unittest.main()
