import unittest
import math
import os
import sys

import numpy as np

# Add project root to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

from src.models.eigenvalues import (
    jacobi_eigenvalues,
    max_real_eigenvalue,
    max_symmetric_eigenvalue,
)

LORENZ_ORIGIN_DS = (-11.0 + math.sqrt(1201.0)) / 2.0


class TestMaxRealEigenvalue(unittest.TestCase):
    """Test cases for the closed-form eigenvalue bound"""

    def test_lorenz_origin(self):
        """Test the linearization of Lorenz at the origin"""
        L = np.array([[-10.0, 10.0, 0.0], [28.0, -1.0, 0.0], [0.0, 0.0, -8.0 / 3.0]])
        self.assertAlmostEqual(max_real_eigenvalue(L), LORENZ_ORIGIN_DS, delta=1e-12)

    def test_complex_pair(self):
        """Test a rotation block whose dominant real part comes from a complex pair"""
        L = np.array([[0.5, -2.0, 0.0], [2.0, 0.5, 0.0], [0.0, 0.0, -1.0]])
        self.assertAlmostEqual(max_real_eigenvalue(L), 0.5, delta=1e-12)

    def test_two_by_two_complex(self):
        """Test a 2x2 matrix with complex eigenvalues"""
        self.assertAlmostEqual(max_real_eigenvalue(np.array([[-1.0, 3.0], [-3.0, -1.0]])), -1.0, delta=1e-15)

    def test_scalar(self):
        """Test the 1x1 case"""
        self.assertEqual(max_real_eigenvalue(np.array([[-4.5]])), -4.5)

    def test_random_matrices_against_numpy(self):
        """Test random matrices up to 3x3 against a general eigensolver"""
        rng = np.random.default_rng(42)
        for p in (1, 2, 3):
            for _ in range(50):
                A = rng.normal(scale=5.0, size=(p, p))
                expected = float(np.max(np.linalg.eigvals(A).real))
                self.assertAlmostEqual(max_real_eigenvalue(A), expected, delta=1e-9 * (1.0 + abs(expected)))

    def test_larger_matrix_rejected(self):
        """Test that the closed form stops at p = 3"""
        with self.assertRaises(ValueError):
            max_real_eigenvalue(np.eye(4))

    def test_invalid_input(self):
        """Test non-square and non-finite input"""
        with self.assertRaises(ValueError):
            max_real_eigenvalue(np.zeros((2, 3)))
        with self.assertRaises(ValueError):
            max_real_eigenvalue(np.array([[np.inf]]))


class TestJacobi(unittest.TestCase):
    """Test cases for cyclic Jacobi rotations"""

    def test_random_symmetric_against_numpy(self):
        """Test eigenvalues of random symmetric matrices"""
        rng = np.random.default_rng(7)
        for n in (2, 4, 6, 9):
            B = rng.normal(size=(n, n))
            H = (B + B.T) / 2.0
            np.testing.assert_allclose(jacobi_eigenvalues(H), np.linalg.eigvalsh(H), rtol=0, atol=1e-10)

    def test_diagonal_matrix(self):
        """Test that a diagonal matrix is returned sorted"""
        np.testing.assert_array_equal(jacobi_eigenvalues(np.diag([3.0, -1.0, 2.0])), [-1.0, 2.0, 3.0])

    def test_non_symmetric_rejected(self):
        """Test that a non-symmetric matrix is rejected"""
        with self.assertRaises(ValueError):
            jacobi_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_max_symmetric_eigenvalue(self):
        """Test the largest eigenvalue for every size branch"""
        rng = np.random.default_rng(3)
        for n in (1, 2, 3, 5):
            B = rng.normal(size=(n, n))
            H = (B + B.T) / 2.0
            self.assertAlmostEqual(max_symmetric_eigenvalue(H), float(np.linalg.eigvalsh(H)[-1]), delta=1e-10)


if __name__ == '__main__':
    unittest.main()
