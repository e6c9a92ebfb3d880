"""
NC-Chern - Chern Estimator Tests

Unit tests for the momentum-space and real-space Chern numbers and the
disorder ensemble.
"""

import unittest

import numpy as np
import pytest

from src.algebra.nctorus import DerivationKind, DerivationScheme, core_sites
from src.builders.disorder import sample_disorder
from src.builders.hamiltonian import build_hamiltonian, fermi_projector, magnetic_translation
from src.builders.lattice import Boundary, FiniteVolume, MagneticField
from src.builders.zoo import atomic, chern2d, dirac4d
from src.calculators.chern import (
    PhaseSettings,
    core_sensitivity,
    disorder_averaged_chern,
    kspace_chern,
    phase_diagram,
    realspace_chern,
)
from src.calculators.localization import localization_length
from src.errors import ArgumentError, DimensionError, GapError


class TestKspaceChern(unittest.TestCase):
    """Test cases for kspace_chern."""

    def test_topological_phase_is_unit(self):
        estimate = kspace_chern(chern2d(1.0), 0.0, 1, 32)
        self.assertAlmostEqual(abs(estimate.value), 1.0, places=8)
        self.assertEqual(estimate.method, "kspace")

    def test_opposite_mass_flips_sign(self):
        plus = kspace_chern(chern2d(1.0), 0.0, 1, 32)
        minus = kspace_chern(chern2d(-1.0), 0.0, 1, 32)
        self.assertAlmostEqual(plus.value, -minus.value, places=8)

    def test_trivial_phase(self):
        self.assertAlmostEqual(kspace_chern(chern2d(3.0), 0.0, 1, 32).value, 0.0, places=8)

    def test_methods_agree(self):
        links = kspace_chern(chern2d(1.0), 0.0, 1, 32, "links")
        analytic = kspace_chern(chern2d(1.0), 0.0, 1, 32, "analytic")
        central = kspace_chern(chern2d(1.0), 0.0, 1, 48, "central")
        self.assertAlmostEqual(analytic.value, links.value, delta=1e-2)
        self.assertAlmostEqual(central.value, links.value, delta=5e-2)

    def test_methods_agree_second_chern(self):
        """Test the analytic and central-difference derivatives both run for n = 2."""
        analytic = kspace_chern(dirac4d(-3.0), 0.0, 2, 10)
        central = kspace_chern(dirac4d(-3.0), 0.0, 2, 10, "central")
        self.assertEqual(analytic.metadata["method"], "analytic")
        self.assertAlmostEqual(abs(analytic.value), 1.0, delta=0.05)
        self.assertEqual(np.sign(central.value), np.sign(analytic.value))
        self.assertLess(abs(central.imag), 1e-6)

    def test_atomic_is_zero(self):
        self.assertEqual(kspace_chern(atomic(-1.0), 0.0, 1, 8).value, 0.0)

    def test_gap_closing(self):
        """Test m = 0 closes the gap at (0, pi) on an even grid."""
        with self.assertRaises(GapError):
            kspace_chern(chern2d(0.0), 0.0, 1, 16)

    def test_links_need_n1(self):
        with self.assertRaises(ArgumentError):
            kspace_chern(dirac4d(-3.0), 0.0, 2, 4, "links")

    def test_dimension_mismatch(self):
        with self.assertRaises(DimensionError):
            kspace_chern(chern2d(), 0.0, 2, 8)


@pytest.mark.slow
def test_second_chern_of_dirac4d():
    """The four-band Dirac model at m = -3 carries |C_2| = 1."""
    estimate = kspace_chern(dirac4d(-3.0), 0.0, 2, 12, "analytic")
    assert abs(abs(estimate.value) - 1.0) < 0.05


@pytest.mark.slow
def test_second_chern_in_real_space():
    """Clean dirac4d on a periodic L = 6 torus: one core site suffices by translation invariance."""
    vol = FiniteVolume(d=4, L=6, Q=4, boundary=Boundary.PERIODIC)
    projector = fermi_projector(build_hamiltonian(dirac4d(-3.0), vol), 0.0)
    realspace = realspace_chern(projector, vol, 2, core=[0])
    kspace = kspace_chern(dirac4d(-3.0), 0.0, 2, 12)
    assert abs(realspace.value - round(kspace.value)) < 0.15
    assert realspace.metadata["scheme"] == DerivationKind.PERIODIC_MINIMAL.value


class TestRealspaceChern(unittest.TestCase):
    """Test cases for realspace_chern."""

    @classmethod
    def setUpClass(cls):
        cls.vol = FiniteVolume(d=2, L=20, Q=2)
        cls.projector = fermi_projector(build_hamiltonian(chern2d(1.0), cls.vol), 0.0)

    def test_matches_kspace(self):
        realspace = realspace_chern(self.projector, self.vol, 1)
        kspace = kspace_chern(chern2d(1.0), 0.0, 1, 32)
        self.assertAlmostEqual(abs(realspace.value), 1.0, delta=0.1)
        self.assertEqual(np.sign(realspace.value), np.sign(kspace.value))
        self.assertLess(abs(realspace.imag), 1e-6)

    def test_trivial_phase(self):
        projector = fermi_projector(build_hamiltonian(chern2d(3.0), self.vol), 0.0)
        self.assertAlmostEqual(realspace_chern(projector, self.vol, 1).value, 0.0, delta=0.05)

    def test_empty_and_full_projectors(self):
        self.assertEqual(realspace_chern(np.zeros((self.vol.dim, self.vol.dim)), self.vol, 1).value, 0.0)
        self.assertAlmostEqual(realspace_chern(np.eye(self.vol.dim), self.vol, 1).value, 0.0, places=12)

    def test_periodic_schemes(self):
        vol = FiniteVolume(d=2, L=16, Q=2, boundary=Boundary.PERIODIC)
        projector = fermi_projector(build_hamiltonian(chern2d(1.0), vol), 0.0)
        phase = realspace_chern(projector, vol, 1, DerivationScheme(DerivationKind.PERIODIC_PHASE, vol))
        self.assertAlmostEqual(abs(phase.value), 1.0, delta=0.15)
        self.assertEqual(phase.metadata["scheme"], DerivationKind.PERIODIC_PHASE.value)

        minimal = realspace_chern(projector, vol, 1)
        self.assertAlmostEqual(abs(minimal.value), 1.0, delta=0.05)
        self.assertEqual(minimal.metadata["scheme"], DerivationKind.PERIODIC_MINIMAL.value)

    def test_core_sensitivity(self):
        rows = core_sensitivity(self.projector, self.vol, 1)
        self.assertEqual([row["fraction"] for row in rows], [0.25, 0.5, 0.75])
        self.assertAlmostEqual(abs(rows[0]["value"]), 1.0, delta=0.1)

    def test_empty_core_rejected(self):
        with self.assertRaises(ArgumentError):
            realspace_chern(self.projector, self.vol, 1, core=[])

    def test_shape_mismatch(self):
        with self.assertRaises(DimensionError):
            realspace_chern(np.eye(4), self.vol, 1)


class TestEnsemble:
    """Disorder averaging and phase diagrams."""

    @pytest.fixture
    def vol(self):
        return FiniteVolume(d=2, L=12, Q=2)

    def test_weak_disorder_keeps_quantization(self, vol):
        estimate = disorder_averaged_chern(chern2d(1.0), vol, None, 0.5, 0.0, 1, [0, 1, 2])
        assert estimate.realizations == 3
        assert len(estimate.per_seed) == 3
        assert abs(abs(estimate.value) - 1.0) < 0.2
        assert estimate.stderr == pytest.approx(np.std(estimate.per_seed, ddof=1) / np.sqrt(3))

    def test_single_seed_has_no_stderr(self, vol):
        estimate = disorder_averaged_chern(chern2d(1.0), vol, None, 0.5, 0.0, 1, [4])
        assert estimate.stderr == 0.0

    def test_parallel_matches_serial(self, vol):
        serial = disorder_averaged_chern(chern2d(1.0), vol, None, 1.0, 0.0, 1, [0, 1], workers=1)
        parallel = disorder_averaged_chern(chern2d(1.0), vol, None, 1.0, 0.0, 1, [0, 1], workers=2)
        assert serial.per_seed == pytest.approx(parallel.per_seed, abs=1e-10)

    def test_empty_seeds_rejected(self, vol):
        with pytest.raises(ArgumentError):
            disorder_averaged_chern(chern2d(1.0), vol, None, 0.5, 0.0, 1, [])

    def test_phase_diagram_order_and_values(self, vol):
        settings = PhaseSettings(vol=vol, fermi_energy=0.0, n=1, seeds=[0])
        rows = phase_diagram("chern2d", [(1.0, 0.0), (3.0, 0.0)], settings)
        assert [row.index for row in rows] == [0, 1]
        assert abs(abs(rows[0].estimate.value) - 1.0) < 0.2
        assert abs(rows[1].estimate.value) < 0.1

    def test_phase_diagram_keeps_failed_points(self, vol):
        settings = PhaseSettings(vol=vol, fermi_energy=0.0, n=1, seeds=[0])
        rows = phase_diagram("hofstadter2d", [(1.0, 0.0)], settings)
        assert rows[0].estimate is None
        assert "ArgumentError" in rows[0].error

    @pytest.mark.slow
    def test_weak_disorder_matches_clean_integer(self):
        """Test ten realizations at lambda = 1 average to the clean integer on L = 20."""
        clean = kspace_chern(chern2d(1.0), 0.0, 1, 32)
        estimate = disorder_averaged_chern(chern2d(1.0), FiniteVolume(d=2, L=20, Q=2), None, 1.0, 0.0, 1, list(range(10)))
        assert estimate.realizations == 10
        assert estimate.stderr > 0.0
        assert abs(estimate.value - clean.nearest_integer) < 0.1

    @pytest.mark.slow
    def test_strong_disorder_collapses(self):
        estimate = disorder_averaged_chern(chern2d(1.0), FiniteVolume(d=2, L=20, Q=2), None, 20.0, 0.0, 1, list(range(10)))
        assert abs(estimate.value) < 0.1


class TestInvariance:
    """Homotopy and magnetic translation invariance of the real-space estimators."""

    def test_gapped_deformation_keeps_integer(self):
        vol = FiniteVolume(d=2, L=14, Q=2)
        values = []
        for m in (0.8, 1.2):
            dis = sample_disorder(vol, chern2d(m), 0.5, 3)
            projector = fermi_projector(build_hamiltonian(chern2d(m), vol, None, dis), 0.0)
            values.append(realspace_chern(projector, vol, 1))
        assert values[0].nearest_integer == values[1].nearest_integer != 0

    def test_magnetic_translation_invariance(self):
        """Test the full-volume Chern number and Lambda_1 do not change under U_a P U_a^dagger."""
        vol = FiniteVolume(d=2, L=8, Q=2, boundary=Boundary.PERIODIC)
        B = MagneticField.from_entries(2, [(1, 2, 1 / 8)])
        dis = sample_disorder(vol, chern2d(1.0), 1.0, 5)
        P = fermi_projector(build_hamiltonian(chern2d(1.0), vol, B, dis), 0.0).P
        base = realspace_chern(P, vol, 1)
        base_length = localization_length(P, vol, 1)
        for a in [(1, 0), (0, 3), (2, 5)]:
            U = magnetic_translation(vol, B, a)
            moved = U @ P @ U.conj().T
            assert realspace_chern(moved, vol, 1).value == pytest.approx(base.value, abs=1e-9)
            assert localization_length(moved, vol, 1) == pytest.approx(base_length, rel=1e-9)


def test_core_is_subset_of_volume():
    vol = FiniteVolume(d=2, L=9)
    assert set(core_sites(vol).tolist()) <= set(range(vol.n_sites))


if __name__ == "__main__":
    unittest.main()
