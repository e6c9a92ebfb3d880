"""
NC-Chern - Clifford Representation Tests

Unit tests for the gamma matrices, contractions and the graded trace.
"""

import unittest

import numpy as np
import pytest

from src.algebra.clifford import build_clifford, gamma_dot, graded_trace, graded_trace_batch
from src.errors import DimensionError


class TestBuildClifford(unittest.TestCase):
    """Test cases for build_clifford."""

    def test_dimensions(self):
        """Test spinor dimension 2^n and 2n generators."""
        for n in (1, 2, 3):
            rep = build_clifford(n)
            self.assertEqual(rep.dim, 2 ** n)
            self.assertEqual(len(rep.gammas), 2 * n)
            self.assertEqual(rep.gamma0.shape, (2 ** n, 2 ** n))

    def test_anticommutation(self):
        """Test gamma_i gamma_j + gamma_j gamma_i = 2 delta_ij."""
        for n in (1, 2, 3):
            rep = build_clifford(n)
            identity = np.eye(rep.dim)
            for i, gi in enumerate(rep.gammas):
                np.testing.assert_allclose(gi, gi.conj().T, atol=1e-13)
                self.assertLess(abs(np.trace(gi)), 1e-13)
                for j, gj in enumerate(rep.gammas):
                    expected = 2 * identity if i == j else 0 * identity
                    np.testing.assert_allclose(gi @ gj + gj @ gi, expected, atol=1e-13)

    def test_chirality(self):
        """Test gamma_0 is a Hermitian involution anticommuting with every generator."""
        for n in (1, 2, 3):
            rep = build_clifford(n)
            g0 = rep.gamma0
            np.testing.assert_allclose(g0, g0.conj().T, atol=1e-13)
            np.testing.assert_allclose(g0 @ g0, np.eye(rep.dim), atol=1e-13)
            self.assertLess(abs(np.trace(g0)), 1e-13)
            for gamma in rep.gammas:
                np.testing.assert_allclose(g0 @ gamma + gamma @ g0, 0, atol=1e-13)

    def test_deterministic(self):
        """Test two builds return identical matrices."""
        first, second = build_clifford(2), build_clifford(2)
        for a, b in zip(first.gammas, second.gammas):
            np.testing.assert_array_equal(a, b)
        self.assertEqual(first.orientation, second.orientation)

    def test_out_of_range(self):
        """Test n outside 1..4 raises DimensionError."""
        with self.assertRaises(DimensionError):
            build_clifford(0)
        with self.assertRaises(DimensionError):
            build_clifford(5)


class TestGammaDot(unittest.TestCase):
    """Test cases for gamma_dot."""

    def setUp(self):
        self.rep = build_clifford(2)
        self.rng = np.random.default_rng(7)

    def test_zero_vector(self):
        np.testing.assert_array_equal(gamma_dot(self.rep, np.zeros(4)), np.zeros((4, 4)))

    def test_basis_vector(self):
        np.testing.assert_allclose(gamma_dot(self.rep, [1, 0, 0, 0]), self.rep.gammas[0])

    def test_square_is_norm(self):
        """Test (v.gamma)^2 = |v|^2."""
        for _ in range(5):
            v = self.rng.standard_normal(4)
            m = gamma_dot(self.rep, v)
            np.testing.assert_allclose(m @ m, np.dot(v, v) * np.eye(4), atol=1e-13)

    def test_wrong_length(self):
        with self.assertRaises(DimensionError):
            gamma_dot(self.rep, [1.0, 2.0])


class TestGradedTrace:
    """Graded trace against determinants."""

    @pytest.mark.parametrize("n", [1, 2])
    def test_repeated_vector_vanishes(self, n):
        rep = build_clifford(n)
        vectors = np.random.default_rng(1).standard_normal((2 * n, 2 * n))
        vectors[1] = vectors[0]
        assert abs(graded_trace(rep, vectors)) < 1e-12

    def test_standard_basis_n1(self):
        """Magnitude 2 and purely imaginary."""
        rep = build_clifford(1)
        value = graded_trace(rep, np.eye(2))
        assert abs(abs(value) - 2.0) < 1e-12
        assert abs(value.real) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_ratio_to_determinant_is_constant(self, n):
        rep = build_clifford(n)
        rng = np.random.default_rng(n)
        for _ in range(10):
            vectors = rng.standard_normal((2 * n, 2 * n))
            det = np.linalg.det(vectors.T)
            np.testing.assert_allclose(graded_trace(rep, vectors) / det, rep.graded_constant, rtol=1e-10)

    def test_orientation_is_sign(self):
        for n in (1, 2, 3, 4):
            assert build_clifford(n).orientation in (1, -1)

    def test_batch_matches_single(self):
        rep = build_clifford(2)
        stacked = np.random.default_rng(3).standard_normal((6, 4, 4))
        batch = graded_trace_batch(rep, stacked)
        for k in range(6):
            assert abs(batch[k] - graded_trace(rep, stacked[k])) < 1e-10

    def test_wrong_shape(self):
        with pytest.raises(DimensionError):
            graded_trace(build_clifford(1), np.eye(3))


class TestDiracHelpers(unittest.TestCase):
    """Test cases for the dirac_block and symmetric_insertion helpers."""

    def test_dirac_block_is_unitary(self):
        rep = build_clifford(2)
        block = rep.dirac_block([3.0, -1.0, 2.0, 0.5])
        np.testing.assert_allclose(block @ block, np.eye(4), atol=1e-13)

    def test_symmetric_insertion_is_involution(self):
        rep = build_clifford(2)
        insertion = rep.symmetric_insertion()
        np.testing.assert_allclose(insertion @ insertion, np.eye(4), atol=1e-13)


if __name__ == "__main__":
    unittest.main()
