"""Steering model checks against hand-derived phases and a loop oracle."""

import numpy as np
import pytest

from morphbeam.array_model import (
    ArrayGeometry,
    SurfaceShape,
    TargetSet,
    response_matrix,
    steering_matrix,
    steering_vector,
)

TWO_PI = 2.0 * np.pi


def small_geom(n_x=2, n_z=2, dx=0.5, dz=0.5, d_max=0.0):
    return ArrayGeometry(n_x=n_x, n_z=n_z, dx=dx, dz=dz,
                         wavelength=0.0107, d_max=d_max)


def loop_steering(geom, theta, phi, displacements):
    """Element-by-element reference implementation of the phase model."""
    a = np.empty(geom.n_elements, dtype=complex)
    for i_z in range(geom.n_z):
        for i_x in range(geom.n_x):
            n = i_z * geom.n_x + i_x
            path = (
                i_x * geom.dx * np.sin(theta) * np.cos(phi)
                + i_z * geom.dz * np.cos(theta)
                + displacements[n] * np.sin(theta) * np.sin(phi)
            )
            a[n] = np.exp(-1j * TWO_PI * path)
    return a


class TestGeometryValidation:
    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            small_geom(n_x=0)
        with pytest.raises(ValueError):
            small_geom(n_z=-1)

    def test_rejects_bad_spacings(self):
        with pytest.raises(ValueError):
            small_geom(dx=0.0)
        with pytest.raises(ValueError):
            small_geom(dz=-0.5)

    def test_rejects_bad_wavelength_and_range(self):
        with pytest.raises(ValueError):
            ArrayGeometry(n_x=2, n_z=2, dx=0.5, dz=0.5, wavelength=0.0)
        with pytest.raises(ValueError):
            small_geom(d_max=-0.1)

    def test_derived_quantities(self):
        geom = ArrayGeometry(n_x=3, n_z=4, dx=0.5, dz=0.5, wavelength=0.01)
        assert geom.n_elements == 12
        assert geom.wavenumber == pytest.approx(TWO_PI / 0.01)


class TestSteeringVector:
    def test_hand_computed_phases_flat_2x2(self):
        # theta = 30 deg, phi = 60 deg on a half-wavelength 2x2 grid:
        # x phase step 2*pi*0.5*sin(30)*cos(60) = pi/4,
        # z phase step 2*pi*0.5*cos(30) = 0.8660*pi.
        geom = small_geom()
        theta, phi = np.pi / 6, np.pi / 3
        a = steering_vector(geom, theta, phi, SurfaceShape.zero(geom))
        a_x1 = np.exp(-1j * np.pi / 4)
        a_z1 = np.exp(-1j * TWO_PI * 0.5 * np.cos(theta))
        expected = np.array([1.0, a_x1, a_z1, a_z1 * a_x1])
        np.testing.assert_allclose(a, expected, atol=1e-14)

    def test_displacement_phase_term(self):
        geom = small_geom(d_max=0.5)
        theta, phi = np.pi / 6, np.pi / 3
        d = np.array([0.0, 0.1, -0.2, 0.35])
        flat = steering_vector(geom, theta, phi, SurfaceShape.zero(geom))
        moved = steering_vector(geom, theta, phi, SurfaceShape(d))
        extra = np.exp(-1j * TWO_PI * d * np.sin(theta) * np.sin(phi))
        np.testing.assert_allclose(moved, flat * extra, atol=1e-14)

    def test_boresight_is_all_ones_along_x(self):
        # theta = pi/2, phi = pi/2: x and z path terms vanish, only the
        # displacement term survives.
        geom = small_geom(n_x=3, n_z=2, d_max=0.3)
        d = np.linspace(-0.3, 0.3, 6)
        a = steering_vector(geom, np.pi / 2, np.pi / 2, SurfaceShape(d))
        np.testing.assert_allclose(a, np.exp(-1j * TWO_PI * d), atol=1e-14)

    def test_angle_range_validation(self):
        geom = small_geom()
        with pytest.raises(ValueError):
            steering_vector(geom, -0.1, 1.0, SurfaceShape.zero(geom))
        with pytest.raises(ValueError):
            steering_vector(geom, 1.0, np.pi + 0.1, SurfaceShape.zero(geom))

    def test_matches_loop_oracle_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            geom = small_geom(
                n_x=int(rng.integers(1, 6)), n_z=int(rng.integers(1, 6)),
                dx=float(rng.uniform(0.3, 0.8)), dz=float(rng.uniform(0.3, 0.8)),
                d_max=0.5,
            )
            theta = float(rng.uniform(0.0, np.pi))
            phi = float(rng.uniform(0.0, np.pi))
            d = rng.uniform(-0.5, 0.5, geom.n_elements)
            got = steering_vector(geom, theta, phi, SurfaceShape(d))
            want = loop_steering(geom, theta, phi, d)
            np.testing.assert_allclose(got, want, atol=1e-13)

    def test_unit_modulus(self):
        rng = np.random.default_rng(3)
        geom = small_geom(n_x=4, n_z=3, d_max=1.0)
        thetas = rng.uniform(0.0, np.pi, 11)
        phis = rng.uniform(0.0, np.pi, 11)
        d = rng.uniform(-1.0, 1.0, geom.n_elements)
        a = steering_matrix(geom, thetas, phis, d)
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-14)

    def test_displacement_length_mismatch(self):
        geom = small_geom()
        with pytest.raises(ValueError):
            steering_matrix(geom, np.array([1.0]), np.array([1.0]), np.zeros(3))


class TestResponseMatrix:
    def test_b_is_gram_of_columns(self):
        rng = np.random.default_rng(11)
        geom = small_geom(n_x=3, n_z=3, d_max=0.5)
        targets = TargetSet(thetas=rng.uniform(0, np.pi, 4),
                            phis=rng.uniform(0, np.pi, 4))
        shape = SurfaceShape(rng.uniform(-0.5, 0.5, geom.n_elements))
        rm = response_matrix(geom, targets, shape)
        np.testing.assert_allclose(rm.b, rm.a @ rm.a.conj().T, atol=1e-12)
        assert rm.n_elements == 9
        assert rm.n_targets == 4

    def test_trace_is_targets_times_elements(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            geom = small_geom(n_x=int(rng.integers(2, 5)),
                              n_z=int(rng.integers(2, 5)), d_max=0.25)
            k = int(rng.integers(1, 6))
            targets = TargetSet(thetas=rng.uniform(0, np.pi, k),
                                phis=rng.uniform(0, np.pi, k))
            shape = SurfaceShape(rng.uniform(-0.25, 0.25, geom.n_elements))
            rm = response_matrix(geom, targets, shape)
            trace = float(np.real(np.trace(rm.b)))
            assert trace == pytest.approx(k * geom.n_elements, rel=1e-12)

    def test_b_hermitian_psd(self):
        rng = np.random.default_rng(13)
        geom = small_geom(n_x=4, n_z=2)
        targets = TargetSet(thetas=rng.uniform(0, np.pi, 3),
                            phis=rng.uniform(0, np.pi, 3))
        rm = response_matrix(geom, targets, SurfaceShape.zero(geom))
        np.testing.assert_allclose(rm.b, rm.b.conj().T, atol=1e-14)
        assert np.linalg.eigvalsh(rm.b)[0] >= -1e-10


class TestTargetSet:
    def test_rcs_defaults_to_ones(self):
        ts = TargetSet(thetas=np.array([0.5]), phis=np.array([0.5]))
        np.testing.assert_array_equal(ts.rcs, np.ones(1, dtype=complex))

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            TargetSet(thetas=np.array([0.5, 0.6]), phis=np.array([0.5]))
        with pytest.raises(ValueError):
            TargetSet(thetas=np.array([0.5]), phis=np.array([0.5]),
                      rcs=np.array([1.0, 2.0]))

    def test_angle_domain(self):
        with pytest.raises(ValueError):
            TargetSet(thetas=np.array([-0.1]), phis=np.array([0.5]))
        with pytest.raises(ValueError):
            TargetSet(thetas=np.array([0.5]), phis=np.array([3.5]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            TargetSet(thetas=np.array([]), phis=np.array([]))

    def test_from_degrees(self):
        ts = TargetSet.from_degrees([30.0, 135.0], [60.0, 90.0])
        np.testing.assert_allclose(ts.thetas, [np.pi / 6, 3 * np.pi / 4])
        np.testing.assert_allclose(ts.phis, [np.pi / 3, np.pi / 2])
        assert ts.n_targets == 2


class TestSurfaceShape:
    def test_zero_and_copy(self):
        geom = small_geom()
        shape = SurfaceShape.zero(geom)
        np.testing.assert_array_equal(shape.displacements, np.zeros(4))
        dup = shape.copy()
        dup.displacements[0] = 1.0
        assert shape.displacements[0] == 0.0

    def test_from_meters(self):
        shape = SurfaceShape.from_meters([0.0107, -0.00535], wavelength=0.0107)
        np.testing.assert_allclose(shape.displacements, [1.0, -0.5])

    def test_uniform_random_stays_in_box(self):
        geom = small_geom(d_max=0.4)
        rng = np.random.default_rng(5)
        for _ in range(20):
            shape = SurfaceShape.uniform_random(geom, rng)
            assert np.all(np.abs(shape.displacements) <= 0.4)

    def test_validate(self):
        geom = small_geom(d_max=0.2)
        SurfaceShape(np.full(4, 0.2)).validate(geom)
        with pytest.raises(ValueError):
            SurfaceShape(np.full(4, 0.3)).validate(geom)
        with pytest.raises(ValueError):
            SurfaceShape(np.zeros(3)).validate(geom)
