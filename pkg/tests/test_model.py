#!/usr/bin/env python3
"""
Tests for system parameters and rotating-frame Hamiltonians.
"""

import cmath
import os
import sys
import unittest
import warnings

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from drivenkerr.algebra import is_hermitian, product_index
from drivenkerr.errors import ConfigError, InvalidDimensionError, RegimeWarning
from drivenkerr.model import (
    SystemParams, coupled_hamiltonian, coupled_hamiltonian_parts, driven_transmon_hamiltonian,
    rwa_validity, with_drive_power,
)


class TestSystemParams(unittest.TestCase):
    """Parameter validation and the flat config boundary."""

    def test_config_round_trip(self):
        p = SystemParams(delta_a=9.64, delta_b=-7.0, delta_d=2.0, g_a=0.617 + 0.1j, g_b=0.2,
                         omega_d=0.5 - 0.3j, n_transmon=6, n_a=5, n_b=3, gamma=1e-5)
        self.assertEqual(SystemParams.from_config(p.to_config()), p)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError):
            SystemParams.from_config({'delta_a': 10.0, 'detla_d': 3.0})

    def test_bad_value(self):
        with self.assertRaises(ConfigError):
            SystemParams.from_config({'delta_a': 'ten'})

    def test_truncation_guard(self):
        with self.assertRaises(InvalidDimensionError):
            SystemParams(n_transmon=2)

    def test_non_dispersive_warns(self):
        with self.assertWarns(RegimeWarning):
            SystemParams(delta_a=1.0, g_a=2.0)

    def test_derived_detunings(self):
        p = SystemParams(delta_a=10.0, delta_d=3.0)
        self.assertAlmostEqual(p.delta_dc, 2.0)
        self.assertAlmostEqual(p.delta_da, -7.0)
        conv = p.conventions
        # delta_d,0 is the detuning from the 0 -> 1 transition
        self.assertAlmostEqual(conv.delta_dm(0), p.delta_d)
        self.assertAlmostEqual(conv.delta_dm(2), p.delta_d + 2.0)

    def test_drive_power_keeps_phase(self):
        p = SystemParams(delta_d=2.0, omega_d=cmath.exp(0.7j))
        q = with_drive_power(p, 0.45)
        self.assertAlmostEqual(q.drive_power, 0.45)
        self.assertAlmostEqual(q.drive_phase, 0.7)
        self.assertAlmostEqual(abs(q.conventions.omega_dm(3)), 2.0 * abs(q.omega_d))

    def test_rwa_validity(self):
        p = SystemParams(omega_d=1.0)
        self.assertEqual(rwa_validity(p), {})
        with self.assertWarns(RegimeWarning):
            ratios = rwa_validity(p.replace(omega_d=5.0, e_c_hz=0.168e9, e_j_hz=20e9))
        self.assertGreater(ratios['drive_amplitude'], 0.1)


class TestHamiltonians(unittest.TestCase):
    """Driven transmon and coupled Hamiltonians."""

    def test_transmon_diagonal(self):
        """At zero drive the (1,1) entry is -delta_d."""
        p = SystemParams(delta_d=3.0, n_transmon=5)
        H = driven_transmon_hamiltonian(p)
        self.assertAlmostEqual(H[1, 1].real, -3.0)
        self.assertAlmostEqual(H[0, 0].real, 0.0)
        self.assertAlmostEqual(H[2, 2].real, -2.0 * p.delta_dc - 3.0)

    def test_transmon_drive_elements(self):
        p = SystemParams(delta_d=3.0, omega_d=0.4j, n_transmon=5)
        H = driven_transmon_hamiltonian(p)
        self.assertTrue(is_hermitian(H))
        self.assertAlmostEqual(H[1, 0], 0.4j)
        self.assertAlmostEqual(H[3, 2], np.sqrt(3.0) * 0.4j)

    def test_coupled_structure(self):
        p = SystemParams(delta_a=10.0, delta_b=-8.0, g_a=0.3, g_b=0.2, omega_d=0.5,
                         n_transmon=4, n_a=3, n_b=3)
        H = coupled_hamiltonian(p)
        self.assertEqual(H.shape, (36, 36))
        self.assertTrue(is_hermitian(H))
        dims = p.dims
        # g_a a c^dagger moves one photon from cavity a into the transmon
        row = product_index((1, 0, 0), dims)
        col = product_index((0, 1, 0), dims)
        self.assertAlmostEqual(H[row, col], 0.3)

    def test_single_cavity_drops_b(self):
        p = SystemParams(g_a=0.3, g_b=0.2, n_transmon=4, n_a=3, n_b=1)
        H0, V = coupled_hamiltonian_parts(p)
        self.assertEqual(H0.shape, (12, 12))
        self.assertTrue(np.allclose(V, V.conj().T))

    def test_dimension_cap(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            p = SystemParams(n_transmon=20, n_a=20, n_b=6)
        with self.assertRaises(InvalidDimensionError):
            coupled_hamiltonian(p)


if __name__ == '__main__':
    unittest.main()
