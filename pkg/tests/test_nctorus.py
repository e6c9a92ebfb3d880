"""
NC-Chern - Finite-Volume Calculus Tests

Unit tests for derivations, the trace per volume and L^s / Sobolev norms.
"""

import unittest

import numpy as np
import pytest

from src.algebra.nctorus import (
    DerivationKind,
    DerivationScheme,
    core_sites,
    derivation,
    ls_norm,
    sobolev_norm,
    trace_per_volume,
)
from src.builders.lattice import Boundary, FiniteVolume
from src.errors import ArgumentError, DimensionError, SchemeError


def _local_operator(vol: FiniteVolume, seed: int, reach: int = 1) -> np.ndarray:
    """Random Hermitian operator with entries only between sites at distance <= reach."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((vol.dim, vol.dim)) + 1j * rng.standard_normal((vol.dim, vol.dim))
    separation = np.abs(vol.orbital_positions[:, None, :] - vol.orbital_positions[None, :, :]).max(axis=-1)
    raw[separation > reach] = 0
    return (raw + raw.conj().T) / 2


class TestDerivationScheme(unittest.TestCase):
    """Test cases for DerivationScheme."""

    def test_default_matches_boundary(self):
        open_vol = FiniteVolume(d=2, L=4)
        periodic_vol = FiniteVolume(d=2, L=4, boundary=Boundary.PERIODIC)
        self.assertIs(DerivationScheme.for_volume(open_vol).kind, DerivationKind.OPEN_COMMUTATOR)
        self.assertIs(DerivationScheme.for_volume(periodic_vol).kind, DerivationKind.PERIODIC_MINIMAL)

    def test_boundary_mismatch(self):
        with self.assertRaises(SchemeError):
            DerivationScheme(DerivationKind.PERIODIC_PHASE, FiniteVolume(d=2, L=4))
        with self.assertRaises(SchemeError):
            DerivationScheme("open", FiniteVolume(d=2, L=4, boundary=Boundary.PERIODIC))

    def test_kind_from_string(self):
        scheme = DerivationScheme("periodic-symmetric", FiniteVolume(d=2, L=4, boundary="periodic"))
        self.assertIs(scheme.kind, DerivationKind.PERIODIC_SYMMETRIC)


class TestDerivation(unittest.TestCase):
    """Test cases for derivation."""

    def setUp(self):
        self.open_vol = FiniteVolume(d=2, L=5, Q=2)
        self.periodic_vol = FiniteVolume(d=2, L=6, Q=1, boundary=Boundary.PERIODIC)

    def test_identity_and_diagonal_vanish(self):
        """Test d_i kills the identity and position-diagonal operators in every scheme."""
        for vol in (self.open_vol, self.periodic_vol):
            kinds = [k for k in DerivationKind if k.periodic == vol.is_periodic]
            diagonal = np.diag(np.arange(vol.dim, dtype=float))
            for kind in kinds:
                scheme = DerivationScheme(kind, vol)
                for direction in (1, 2):
                    np.testing.assert_array_equal(derivation(np.eye(vol.dim), direction, scheme), 0)
                    np.testing.assert_array_equal(derivation(diagonal, direction, scheme), 0)

    def test_single_hop_open(self):
        """Test |x><y| is scaled by i (x_1 - y_1)."""
        vol = self.open_vol
        scheme = DerivationScheme.for_volume(vol)
        x, y = vol.site_index([3, 1], 0), vol.site_index([1, 2], 1)
        f = np.zeros((vol.dim, vol.dim), dtype=complex)
        f[x, y] = 1.0
        result = derivation(f, 1, scheme)
        self.assertAlmostEqual(result[x, y], 2j)
        result = derivation(f, 2, scheme)
        self.assertAlmostEqual(result[x, y], -1j)

    def test_minimal_image_wraps(self):
        """Test the torus commutator uses the shortest separation and drops half-way bonds."""
        vol = self.periodic_vol
        scheme = DerivationScheme.for_volume(vol)
        origin = vol.site_index([0, 0], 0)
        factors = scheme.entry_factors(1)
        self.assertAlmostEqual(factors[vol.site_index([5, 0], 0), origin], -1j)
        self.assertAlmostEqual(factors[vol.site_index([1, 0], 0), origin], 1j)
        self.assertEqual(factors[vol.site_index([3, 0], 0), origin], 0)

        f = _local_operator(vol, 2)
        result = derivation(f, 1, scheme)
        np.testing.assert_allclose(result, result.conj().T, atol=1e-12)

    def test_leibniz_rule_open(self):
        """Test d(fg) = (df)g + f(dg) for the commutator scheme."""
        vol = self.open_vol
        scheme = DerivationScheme.for_volume(vol)
        f, g = _local_operator(vol, 1), _local_operator(vol, 2)
        for direction in (1, 2):
            lhs = derivation(f @ g, direction, scheme)
            rhs = derivation(f, direction, scheme) @ g + f @ derivation(g, direction, scheme)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_periodic_kinds_agree_to_first_order(self):
        """Test both periodic factors approach i(x - y) for short bonds on a large torus."""
        vol = FiniteVolume(d=2, L=40, boundary=Boundary.PERIODIC)
        x, y = vol.site_at([1, 0]), vol.site_at([0, 0])
        for kind in (DerivationKind.PERIODIC_PHASE, DerivationKind.PERIODIC_SYMMETRIC, DerivationKind.PERIODIC_MINIMAL):
            factor = DerivationScheme(kind, vol).entry_factors(1)[x, y]
            self.assertAlmostEqual(factor.imag, 1.0, delta=0.01)

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            derivation(np.eye(3), 1, DerivationScheme.for_volume(self.open_vol))

    def test_direction_out_of_range(self):
        with self.assertRaises(DimensionError):
            DerivationScheme.for_volume(self.open_vol).entry_factors(3)


class TestCoreAndTrace(unittest.TestCase):
    """Test cases for core_sites and trace_per_volume."""

    def test_core_open_is_central_box(self):
        vol = FiniteVolume(d=2, L=10)
        core = core_sites(vol, 0.5)
        self.assertEqual(core.size, 25)
        positions = vol.positions[core]
        self.assertLessEqual(np.abs(positions).max(), 3)

    def test_core_periodic_is_everything(self):
        vol = FiniteVolume(d=2, L=4, boundary=Boundary.PERIODIC)
        self.assertEqual(core_sites(vol).size, 16)

    def test_core_fraction_validated(self):
        with self.assertRaises(ArgumentError):
            core_sites(FiniteVolume(d=2, L=4), 0.0)

    def test_trace_of_identity_is_q(self):
        vol = FiniteVolume(d=2, L=4, Q=3)
        self.assertAlmostEqual(trace_per_volume(np.eye(vol.dim), vol), 3.0)

    def test_trace_of_projector_is_filling(self):
        """Test T(P) = rank / L^d on the full volume."""
        vol = FiniteVolume(d=2, L=4, boundary=Boundary.PERIODIC)
        rng = np.random.default_rng(0)
        vectors, _ = np.linalg.qr(rng.standard_normal((vol.dim, 5)))
        P = vectors @ vectors.T
        self.assertAlmostEqual(trace_per_volume(P, vol).real, 5 / 16, places=12)

    def test_translation_invariant_trace_is_core_independent(self):
        vol = FiniteVolume(d=2, L=6, boundary=Boundary.PERIODIC)
        hop = np.zeros((vol.dim, vol.dim))
        hop[np.arange(vol.n_sites), vol.shifted_sites((1, 0))] = 1.0
        f = np.diag(np.full(vol.dim, 0.7)) + hop @ hop.T
        first = trace_per_volume(f, vol, [0, 1, 2])
        second = trace_per_volume(f, vol, [10, 20])
        self.assertAlmostEqual(first, second, places=12)


class TestNorms:
    """L^s and Sobolev norms."""

    def test_identity_norm(self):
        vol = FiniteVolume(d=2, L=4, Q=2)
        assert ls_norm(np.eye(vol.dim), 2, vol) == pytest.approx(2 ** 0.5)
        assert ls_norm(np.eye(vol.dim), 4, vol) == pytest.approx(2 ** 0.25)

    def test_zero_norm(self):
        vol = FiniteVolume(d=2, L=4)
        assert ls_norm(np.zeros((vol.dim, vol.dim)), 2, vol) == 0.0
        assert sobolev_norm(np.zeros((vol.dim, vol.dim)), 1, vol) == 0.0

    def test_exponent_validated(self):
        vol = FiniteVolume(d=2, L=3)
        with pytest.raises(ArgumentError):
            ls_norm(np.eye(vol.dim), 0.5, vol)

    def test_unitary_invariance(self):
        """Test ||U f U^dagger|| = ||f|| for a position-diagonal unitary."""
        vol = FiniteVolume(d=2, L=6)
        f = _local_operator(vol, 4)
        phases = np.exp(1j * np.random.default_rng(5).uniform(0, 2 * np.pi, vol.dim))
        U = np.diag(phases)
        assert ls_norm(U @ f @ U.conj().T, 2, vol) == pytest.approx(ls_norm(f, 2, vol), abs=1e-10)

    def test_sobolev_identity(self):
        vol = FiniteVolume(d=2, L=4, Q=2)
        assert sobolev_norm(np.eye(vol.dim), 1, vol) == pytest.approx(2 ** 0.5)

    def test_sobolev_triangle_inequality(self):
        vol = FiniteVolume(d=2, L=6)
        f, g = _local_operator(vol, 8), _local_operator(vol, 9)
        assert sobolev_norm(f + g, 1, vol) <= sobolev_norm(f, 1, vol) + sobolev_norm(g, 1, vol) + 1e-10

    def test_sobolev_dimension_check(self):
        vol = FiniteVolume(d=2, L=3)
        with pytest.raises(DimensionError):
            sobolev_norm(np.eye(vol.dim), 2, vol)


if __name__ == "__main__":
    unittest.main()
