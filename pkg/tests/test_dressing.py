#!/usr/bin/env python3
"""
Tests for the labeled exact diagonalization and normal-ordered extraction.
"""

import os
import sys
import unittest

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from drivenkerr.dressing import (
    cross_kerr_from_spectrum, diagonalize_labeled, expansion_from_shifts, extract_expansion,
    kerr_scaling_probe, spectrum_table, truncation_convergence,
)
from drivenkerr.errors import TruncationError
from drivenkerr.floquet import solve_adiabatic
from drivenkerr.model import SystemParams, with_drive_power
from drivenkerr.perturbation import self_kerr, zero_drive_kerr

DEVICE = SystemParams(delta_a=9.64, g_a=0.064 * 9.64, delta_d=3.0, n_transmon=8, n_a=6)


class TestNormalOrderedExpansion(unittest.TestCase):
    """Triangular solve between energy shifts and normal-ordered coefficients."""

    def test_recovers_coefficients(self):
        offset, omega, kerr, beta = 0.1, 0.2, -0.03, 0.004
        shifts = [offset + omega * n + kerr / 2 * n * (n - 1) + beta / 6 * n * (n - 1) * (n - 2)
                  for n in range(4)]
        exp = expansion_from_shifts(shifts, m=1, max_order=3)
        np.testing.assert_allclose(exp.coefficients, [offset, omega, kerr, beta, 0.0], atol=1e-12)
        self.assertEqual(exp.m, 1)
        for n in range(4):
            self.assertAlmostEqual(exp.resum(n), shifts[n])

    def test_order_limits(self):
        with self.assertRaises(ValueError):
            expansion_from_shifts([0.0] * 6, max_order=5)
        with self.assertRaises(TruncationError):
            expansion_from_shifts([0.0, 1.0], max_order=2)


class TestLabeledSpectrum(unittest.TestCase):
    """Adiabatic labeling of the coupled eigenstates."""

    def test_uncoupled_spectrum(self):
        p = with_drive_power(DEVICE.replace(g_a=0.0), 0.1)
        spec = diagonalize_labeled(p)
        self.assertEqual(spec.dims, (8, 6, 1))
        for m in range(3):
            for n in range(4):
                self.assertAlmostEqual(spec.shift(m, n), 0.0, places=10)
        exp = extract_expansion(spec, 0, max_order=3)
        self.assertAlmostEqual(exp.kerr, 0.0, places=10)

    def test_trusted_region(self):
        spec = diagonalize_labeled(DEVICE)
        self.assertTrue(spec.is_trusted(0, 0))
        self.assertFalse(spec.is_trusted(6, 0))
        self.assertFalse(spec.is_trusted(0, 5))
        table = spectrum_table(spec)
        self.assertEqual(len(table), DEVICE.dim)
        self.assertEqual(list(table.columns), ['m', 'N_a', 'N_b', 'E', 'trusted'])

    def test_state_vectors_are_orthonormal(self):
        spec = diagonalize_labeled(with_drive_power(DEVICE, 0.1))
        overlap = spec.states.conj().T @ spec.states
        np.testing.assert_allclose(overlap, np.eye(DEVICE.dim), atol=1e-10)

    def test_truncation_guard(self):
        spec = diagonalize_labeled(DEVICE.replace(n_a=4))
        with self.assertRaises(TruncationError):
            extract_expansion(spec, 0, max_order=3)
        with self.assertRaises(TruncationError):
            extract_expansion(spec, 7, max_order=1)


class TestExtractedKerr(unittest.TestCase):
    """Full-diagonalization Kerr against the perturbative results."""

    def test_zero_drive_device_kerr(self):
        spec = diagonalize_labeled(DEVICE)
        kerr = extract_expansion(spec, 0, max_order=2).kerr
        self.assertAlmostEqual(kerr / zero_drive_kerr(DEVICE)[0], 1.0, delta=0.05)

    def test_driven_weak_coupling_agreement(self):
        p = with_drive_power(
            SystemParams(delta_a=-20.0, g_a=0.2, delta_d=3.0, n_transmon=8, n_a=6), 0.1)
        sol = solve_adiabatic(p)
        kerr = extract_expansion(diagonalize_labeled(p, sol=sol), 0, max_order=2).kerr
        self.assertAlmostEqual(kerr / self_kerr(sol, p, 0).value, 1.0, delta=0.03)

    def test_coupling_scaling(self):
        """K scales as g^4 and beta as g^6."""
        frame = kerr_scaling_probe(DEVICE, 0, [1.0, 0.5])
        self.assertAlmostEqual(frame['kerr_ratio'].iloc[1] * 16.0, 1.0, delta=0.03)
        self.assertAlmostEqual(frame['beta_ratio'].iloc[1] * 64.0, 1.0, delta=0.08)

    def test_cross_kerr(self):
        p = SystemParams(delta_a=9.3, delta_b=7.1, g_a=0.3, g_b=0.25, delta_d=3.0,
                         n_transmon=6, n_a=3, n_b=3)
        spec = diagonalize_labeled(p)
        self.assertAlmostEqual(cross_kerr_from_spectrum(spec, 0) / zero_drive_kerr(p)[1], 1.0,
                               delta=0.05)
        with self.assertRaises(TruncationError):
            cross_kerr_from_spectrum(diagonalize_labeled(p.replace(n_b=2)), 0)

    def test_truncation_convergence(self):
        out = truncation_convergence(DEVICE, 0, extra_levels=2)
        self.assertLess(out['relative_change'], 0.01)
        self.assertEqual(out['n_transmon_extended'], 10)


@unittest.skipUnless(os.environ.get("DRIVENKERR_SLOW"), "slow large-drive sweep")
class TestLargeDriveDecay(unittest.TestCase):
    """Exact-diagonalization nonlinearities far above the drive detuning."""

    def test_decay_exponents(self):
        """K, beta and sigma fall off as |Omega_d/delta_d|^-1, ^-3 and ^-5."""
        base = SystemParams(delta_a=9.64, g_a=0.064 * 9.64, delta_d=0.08, n_transmon=16, n_a=7)
        ratios = np.geomspace(10.0, 30.0, 5)
        rows = []
        for ratio in ratios:
            p = with_drive_power(base, ratio ** 2)
            spec = diagonalize_labeled(p, drive_ramp_steps=400)
            rows.append(extract_expansion(spec, 0, max_order=4))
        x = np.log(ratios)

        def slope(name):
            return np.polyfit(x, np.log([abs(getattr(row, name)) for row in rows]), 1)[0]

        self.assertAlmostEqual(slope('kerr'), -1.0, delta=0.1)
        self.assertAlmostEqual(slope('beta'), -3.0, delta=0.1)
        self.assertAlmostEqual(slope('sigma'), -5.0, delta=0.1)


if __name__ == '__main__':
    unittest.main()
