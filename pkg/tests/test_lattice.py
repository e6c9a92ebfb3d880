"""
NC-Chern - Lattice and Model Zoo Tests

Unit tests for finite volumes, flux tensors, hopping models and the zoo.
"""

import unittest

import numpy as np

from src.algebra.clifford import build_clifford
from src.builders.lattice import Boundary, FiniteVolume, HoppingModel, MagneticField, check_compatible
from src.builders.zoo import MODELS, chern2d, dirac4d, hofstadter2d, model_zoo
from src.errors import ArgumentError, DimensionError, GeometryError, ModelLookupError


class TestFiniteVolume(unittest.TestCase):
    """Test cases for FiniteVolume."""

    def test_dimensions(self):
        vol = FiniteVolume(d=2, L=5, Q=3)
        self.assertEqual(vol.n_sites, 25)
        self.assertEqual(vol.dim, 75)
        self.assertEqual(vol.n, 1)

    def test_odd_dimension_rejected(self):
        with self.assertRaises(DimensionError):
            FiniteVolume(d=3, L=4)

    def test_positions_are_origin_centered(self):
        vol = FiniteVolume(d=2, L=5)
        origin = vol.site_at([0, 0])
        np.testing.assert_array_equal(vol.coords[origin], [2, 2])
        np.testing.assert_array_equal(vol.positions[origin], [0, 0])

    def test_site_of_open_outside(self):
        vol = FiniteVolume(d=2, L=3)
        self.assertEqual(int(vol.site_of(np.array([3, 0]))), -1)
        self.assertEqual(int(vol.site_of(np.array([-1, 2]))), -1)

    def test_site_of_periodic_wraps(self):
        vol = FiniteVolume(d=2, L=3, boundary=Boundary.PERIODIC)
        self.assertEqual(int(vol.site_of(np.array([3, 0]))), int(vol.site_of(np.array([0, 0]))))

    def test_shifted_sites(self):
        vol = FiniteVolume(d=2, L=4, boundary=Boundary.PERIODIC)
        shifted = vol.shifted_sites((1, 0))
        x = vol.site_of(np.array([2, 3]))
        self.assertEqual(int(shifted[x]), int(vol.site_of(np.array([1, 3]))))

    def test_site_index_orbital_fastest(self):
        vol = FiniteVolume(d=2, L=3, Q=2)
        self.assertEqual(vol.site_index([0, 1], 1), 3)
        with self.assertRaises(DimensionError):
            vol.site_index([0, 0], 2)


class TestMagneticField(unittest.TestCase):
    """Test cases for MagneticField."""

    def test_from_entries_is_antisymmetric(self):
        B = MagneticField.from_entries(4, [(1, 2, 0.25), (3, 4, -0.5)])
        np.testing.assert_array_equal(B.B, -B.B.T)
        self.assertEqual(B.B[0, 1], 0.25)
        self.assertEqual(B.B[3, 2], 0.5)

    def test_symmetric_rejected(self):
        with self.assertRaises(ArgumentError):
            MagneticField(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_zero_field_phases(self):
        B = MagneticField.zero(2)
        self.assertTrue(B.is_zero)
        np.testing.assert_array_equal(B.peierls(np.ones((3, 2)), np.ones((3, 2))), np.ones(3))


class TestHoppingModel(unittest.TestCase):
    """Test cases for HoppingModel validation and Bloch matrices."""

    def test_non_hermitian_rejected(self):
        with self.assertRaises(ArgumentError):
            HoppingModel(d=2, Q=1, hoppings={(1, 0): [[1.0]], (-1, 0): [[2.0]]}, range=2)

    def test_range_enforced(self):
        with self.assertRaises(ArgumentError):
            HoppingModel(d=2, Q=1, hoppings={(2, 0): [[1.0]], (-2, 0): [[1.0]]}, range=2)

    def test_chern2d_bloch_at_gamma(self):
        """Test H(0) = (m + 2) tau_3."""
        H0 = chern2d(0.5).bloch(np.zeros(2))
        np.testing.assert_allclose(H0, np.diag([2.5, -2.5]), atol=1e-14)

    def test_dirac4d_bloch_at_gamma(self):
        """Test H(0) = (m + 4) Gamma_0."""
        H0 = dirac4d(-3.0).bloch(np.zeros(4))
        np.testing.assert_allclose(H0, 1.0 * build_clifford(2).gamma0, atol=1e-14)

    def test_bloch_derivative_matches_finite_difference(self):
        model = chern2d(1.0)
        k = np.array([0.3, -1.1])
        step = 1e-6
        for j in range(2):
            shift = np.zeros(2)
            shift[j] = step
            numeric = (model.bloch(k + shift) - model.bloch(k - shift)) / (2 * step)
            np.testing.assert_allclose(model.bloch_derivative(k, j), numeric, atol=1e-8)

    def test_disorder_displacements_follow_hoppings(self):
        """Test disorder acts on the hopping bonds and on-site, never on diagonal neighbours."""
        model = chern2d()
        self.assertEqual(model.disorder_displacements, [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)])
        self.assertNotIn((1, 1), model.disorder_displacements)
        self.assertEqual(hofstadter2d().disorder_displacements, [(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)])

    def test_atomic_range_adds_bonds(self):
        self.assertEqual(MODELS["atomic"]().disorder_displacements, [(0, 0)])
        wide = MODELS["atomic"](range=2)
        self.assertEqual(len(wide.disorder_displacements), 9)
        np.testing.assert_array_equal(wide.hoppings[(1, 1)], 0)

    def test_scaled_zero_keeps_geometry(self):
        zero = chern2d().scaled_zero()
        self.assertEqual((zero.d, zero.Q, zero.range), (2, 2, 2))
        self.assertEqual(zero.displacements, chern2d().displacements)
        for block in zero.hoppings.values():
            np.testing.assert_array_equal(block, 0)

    def test_check_compatible(self):
        model = chern2d()
        with self.assertRaises(DimensionError):
            check_compatible(model, FiniteVolume(d=2, L=4, Q=1))
        with self.assertRaises(GeometryError):
            check_compatible(model, FiniteVolume(d=2, L=2, Q=2, boundary=Boundary.PERIODIC))
        check_compatible(model, FiniteVolume(d=2, L=3, Q=2, boundary=Boundary.PERIODIC))


class TestModelZoo(unittest.TestCase):
    """Test cases for model_zoo."""

    def test_all_models_resolve(self):
        for name in MODELS:
            self.assertEqual(model_zoo(name).name, name)

    def test_params_forwarded(self):
        self.assertEqual(model_zoo("chern2d", {"m": -1.5}).params["m"], -1.5)
        self.assertEqual(model_zoo("hofstadter2d", {"t": 2.0}).params["t"], 2.0)

    def test_atomic_zero_is_zero(self):
        model = model_zoo("atomic", {"onsite": 0.0})
        np.testing.assert_array_equal(model.bloch(np.array([0.4, 0.2])), np.zeros((1, 1)))

    def test_unknown_model(self):
        with self.assertRaises(ModelLookupError):
            model_zoo("graphene")

    def test_unknown_param(self):
        with self.assertRaises(ArgumentError):
            model_zoo("chern2d", {"t": 1.0})

    def test_hofstadter_nearest_neighbour(self):
        self.assertEqual(sorted(hofstadter2d().displacements), [(-1, 0), (0, -1), (0, 1), (1, 0)])


if __name__ == "__main__":
    unittest.main()
