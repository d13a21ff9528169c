#!/usr/bin/env python3
"""
Tests for the adiabatically labeled driven-transmon solver.
"""

import cmath
import os
import sys
import unittest

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from drivenkerr.errors import InvalidDimensionError
from drivenkerr.floquet import floquet_table, solve_adiabatic, stark_shifted_transition
from drivenkerr.model import SystemParams, with_drive_power


class TestUndriven(unittest.TestCase):
    """Zero drive: Fock states are exact."""

    def setUp(self):
        self.p = SystemParams(delta_d=3.0, n_transmon=8)
        self.sol = solve_adiabatic(self.p)

    def test_quasienergies(self):
        m = np.arange(8)
        expected = -self.p.delta_dc * m - 0.5 * self.p.alpha * m * (m + 1)
        np.testing.assert_allclose(self.sol.quasienergies, expected, atol=1e-12)
        self.assertAlmostEqual(self.sol.quasienergies[1], -self.p.delta_d)

    def test_ladder_elements(self):
        self.assertAlmostEqual(abs(self.sol.c_minus[0, 1]), 1.0)
        self.assertAlmostEqual(abs(self.sol.c_minus[2, 3]), np.sqrt(3.0))
        np.testing.assert_allclose(self.sol.c_plus, self.sol.c_minus.conj().T)

    def test_stark_transition_vanishes(self):
        """The bare 0 -> 1 transition sits at omega_10."""
        self.assertAlmostEqual(stark_shifted_transition(self.sol, self.p, 1, 0), 0.0)
        with self.assertRaises(InvalidDimensionError):
            stark_shifted_transition(self.sol, self.p, 9, 0)

    def test_untrusted(self):
        self.assertEqual(self.sol.untrusted, frozenset({6, 7}))


class TestDriven(unittest.TestCase):
    """Adiabatic continuation under drive."""

    def test_weak_drive_stark_shift(self):
        """Ground quasienergy follows |Omega|^2 / delta_d to second order."""
        p = SystemParams(delta_d=3.0, omega_d=0.05, n_transmon=8)
        sol = solve_adiabatic(p)
        self.assertAlmostEqual(sol.quasienergies[0] / (0.05 ** 2 / 3.0), 1.0, delta=2e-3)

    def test_ramp_resolution_independent(self):
        p = with_drive_power(SystemParams(delta_d=3.0, n_transmon=10), 0.3)
        coarse = solve_adiabatic(p, ramp_steps=32)
        fine = solve_adiabatic(p, ramp_steps=128)
        np.testing.assert_allclose(coarse.quasienergies[:8], fine.quasienergies[:8], atol=1e-10)

    def test_drive_phase_invariance(self):
        """Quasienergies and |c_mn| do not depend on the drive phase."""
        p = with_drive_power(SystemParams(delta_d=2.0, n_transmon=8), 0.2)
        q = p.replace(omega_d=abs(p.omega_d) * cmath.exp(1.1j))
        a, b = solve_adiabatic(p), solve_adiabatic(q)
        np.testing.assert_allclose(a.quasienergies, b.quasienergies, atol=1e-10)
        np.testing.assert_allclose(np.abs(a.c_minus[:6, :6]), np.abs(b.c_minus[:6, :6]), atol=1e-9)

    def test_states_are_orthonormal(self):
        p = with_drive_power(SystemParams(delta_d=3.0, n_transmon=8), 0.6)
        sol = solve_adiabatic(p)
        np.testing.assert_allclose(sol.states.conj().T @ sol.states, np.eye(8), atol=1e-12)

    def test_bad_ramp(self):
        with self.assertRaises(InvalidDimensionError):
            solve_adiabatic(SystemParams(omega_d=0.1), ramp_steps=0)

    def test_table(self):
        sol = solve_adiabatic(SystemParams(omega_d=0.2, n_transmon=4))
        table = floquet_table(sol)
        self.assertEqual(len(table), 16)
        self.assertEqual(list(table.columns), ['m', 'n', 'eps_m', 're', 'im'])


if __name__ == '__main__':
    unittest.main()
