#!/usr/bin/env python3
"""
Tests for the truncated operator substrate.
"""

import os
import sys
import unittest

import numpy as np

# Add the parent directory to the path so we can import the package
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from drivenkerr.algebra import (
    commutator, eigh, embed, is_hermitian, ladder, number, product_index, product_labels,
)
from drivenkerr.errors import InvalidDimensionError, NonHermitianError


class TestLadder(unittest.TestCase):
    """Truncated bosonic operators."""

    def test_matrix_elements(self):
        """Lowering operator has sqrt(m) on the superdiagonal."""
        a, adag = ladder(4)
        self.assertAlmostEqual(a[0, 1], 1.0)
        self.assertAlmostEqual(a[2, 3], np.sqrt(3.0))
        np.testing.assert_allclose(adag, a.conj().T)

    def test_number_from_ladder(self):
        a, adag = ladder(5)
        np.testing.assert_allclose(adag @ a, number(5), atol=1e-14)

    def test_commutator_is_identity_except_top(self):
        """[a, a^dagger] = 1 everywhere but the truncated top level."""
        a, adag = ladder(6)
        c = commutator(a, adag)
        np.testing.assert_allclose(np.diag(c)[:-1], np.ones(5), atol=1e-14)
        self.assertAlmostEqual(c[-1, -1].real, -5.0)

    def test_invalid_dimension(self):
        with self.assertRaises(InvalidDimensionError):
            ladder(1)


class TestEmbedding(unittest.TestCase):
    """Tensor embedding over [transmon, cavity-a, cavity-b]."""

    def test_embedded_number_counts_slot(self):
        dims = (3, 4, 2)
        N_a = embed(number(4), 1, dims)
        index = product_index((2, 3, 1), dims)
        self.assertAlmostEqual(N_a[index, index].real, 3.0)

    def test_operators_on_different_slots_commute(self):
        dims = (3, 3, 2)
        c, _ = ladder(3)
        a, _ = ladder(3)
        A = embed(c, 0, dims)
        B = embed(a, 1, dims)
        np.testing.assert_allclose(commutator(A, B), 0.0, atol=1e-14)

    def test_shape_mismatch(self):
        with self.assertRaises(InvalidDimensionError):
            embed(number(3), 1, (3, 4, 1))

    def test_labels_follow_flat_order(self):
        dims = (2, 3, 2)
        labels = product_labels(dims)
        self.assertEqual(len(labels), 12)
        for flat, label in enumerate(labels):
            self.assertEqual(product_index(label, dims), flat)


class TestEigh(unittest.TestCase):
    """Hermitian eigendecomposition."""

    def test_reconstruct(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        H = X + X.conj().T
        system = eigh(H)
        self.assertTrue(np.all(np.diff(system.values) >= 0))
        np.testing.assert_allclose(system.reconstruct(), H, atol=1e-12)

    def test_rejects_non_hermitian(self):
        H = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
        self.assertFalse(is_hermitian(H))
        with self.assertRaises(NonHermitianError):
            eigh(H)


if __name__ == '__main__':
    unittest.main()
