import numpy as np
import pytest

from stochtopo.elastic import (
    PLANE_STRAIN,
    PLANE_STRESS,
    ConstitutiveTensor,
    IsotropicPhase,
    isotropic_tensor,
    reduce_to_plane,
    rotate_tensor,
    rotation_from_angles,
    stiffness_tensor_to_voigt,
    stiffness_voigt_to_tensor,
)


def random_spd6(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(6, 6))
    return m @ m.T + 6.0 * np.eye(6)


class TestIsotropic:
    def test_plane_stress_nu_zero_decouples(self):
        c = isotropic_tensor(IsotropicPhase(1.0, 0.0), 2, PLANE_STRESS)
        np.testing.assert_allclose(c.voigt, np.diag([1.0, 1.0, 0.5]), atol=1e-15)

    def test_3d_c1111_closed_form(self):
        # titanium-alloy moduli; oracle is the Lame closed form
        # E (1 - nu) / ((1 + nu) (1 - 2 nu))
        e, nu = 1.138e5, 0.342
        expected = e * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu))
        c = isotropic_tensor(IsotropicPhase(e, nu), 3)
        assert c.voigt[0, 0] == pytest.approx(expected, rel=0.005)
        assert c.voigt[0, 0] == pytest.approx(1.7657e5, rel=0.005)

    def test_linearity_in_modulus(self):
        base = isotropic_tensor(IsotropicPhase(1.0, 0.3), 3)
        scaled = isotropic_tensor(IsotropicPhase(7.5, 0.3), 3)
        np.testing.assert_allclose(scaled.voigt, 7.5 * base.voigt, rtol=1e-14)

    def test_3d_hypothesis_with_dim2_rejected(self):
        with pytest.raises(ValueError):
            isotropic_tensor(IsotropicPhase(1.0, 0.3), 2, "3D")

    def test_invalid_phase_rejected(self):
        with pytest.raises(ValueError):
            IsotropicPhase(-1.0, 0.3)
        with pytest.raises(ValueError):
            IsotropicPhase(1.0, 0.5)

    def test_spd_invariants(self):
        for hyp, dim in ((PLANE_STRESS, 2), (PLANE_STRAIN, 2), ("3D", 3)):
            c = isotropic_tensor(IsotropicPhase(3.0, 0.25), dim, hyp)
            assert c.is_symmetric()
            assert c.is_positive_definite()


class TestVoigtConversion:
    def test_round_trip(self):
        c = random_spd6(0)
        c = 0.5 * (c + c.T)
        t = stiffness_voigt_to_tensor(c)
        np.testing.assert_allclose(stiffness_tensor_to_voigt(t), c, atol=1e-14)

    def test_minor_symmetries(self):
        t = stiffness_voigt_to_tensor(random_spd6(1))
        np.testing.assert_array_equal(t, t.transpose(1, 0, 2, 3))
        np.testing.assert_array_equal(t, t.transpose(0, 1, 3, 2))


class TestRotation:
    def test_zero_angles_identity(self):
        c = ConstitutiveTensor(3, random_spd6(2))
        rot = rotate_tensor(c, 0.0, 0.0)
        np.testing.assert_allclose(rot.voigt, c.voigt, atol=1e-12)

    def test_isotropic_invariance(self):
        c = isotropic_tensor(IsotropicPhase(2.0, 0.3), 3)
        for ti, to in ((0.3, 0.0), (1.2, 0.7), (np.pi / 2, np.pi / 3)):
            rot = rotate_tensor(c, ti, to)
            np.testing.assert_allclose(rot.voigt, c.voigt, atol=1e-10)

    def test_inverse_composition(self):
        # applying the inverse rotation matrix recovers the original tensor
        c = ConstitutiveTensor(3, random_spd6(3))
        ti, to = 0.8, 0.4
        r = rotation_from_angles(ti, to)
        np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-14)
        t = stiffness_voigt_to_tensor(c.voigt)
        fwd = rotate_tensor(c, ti, to)
        rinv = np.linalg.inv(r)
        t_back = np.einsum("pi,qj,rk,sl,ijkl->pqrs", rinv, rinv, rinv, rinv,
                           stiffness_voigt_to_tensor(fwd.voigt))
        np.testing.assert_allclose(stiffness_tensor_to_voigt(t_back), c.voigt,
                                   atol=1e-10 * np.max(np.abs(c.voigt)))

    def test_axis_mapping(self):
        # local axis 1 must land on the direction given by the two angles
        for ti, to in ((0.0, 0.0), (np.pi / 4, np.pi / 6), (2.0, 1.0)):
            r = rotation_from_angles(ti, to)
            d = np.array([np.cos(to) * np.cos(ti),
                          np.cos(to) * np.sin(ti),
                          np.sin(to)])
            np.testing.assert_allclose(r @ np.array([1.0, 0.0, 0.0]), d,
                                       atol=1e-14)


class TestReduceToPlane:
    def test_plane_strain_matches_isotropic(self):
        phase = IsotropicPhase(2.3, 0.31)
        c3 = isotropic_tensor(phase, 3)
        c2 = reduce_to_plane(c3, PLANE_STRAIN)
        ref = isotropic_tensor(phase, 2, PLANE_STRAIN)
        np.testing.assert_allclose(c2.voigt, ref.voigt, atol=1e-10)

    def test_plane_stress_matches_isotropic(self):
        phase = IsotropicPhase(2.3, 0.31)
        c3 = isotropic_tensor(phase, 3)
        c2 = reduce_to_plane(c3, PLANE_STRESS)
        ref = isotropic_tensor(phase, 2, PLANE_STRESS)
        np.testing.assert_allclose(c2.voigt, ref.voigt, atol=1e-10)

    def test_condensation_preserves_spd(self):
        # Schur complement of an SPD block is SPD
        for seed in range(5):
            c3 = ConstitutiveTensor(3, random_spd6(seed))
            c2 = reduce_to_plane(c3, PLANE_STRESS)
            assert np.all(np.linalg.eigvalsh(0.5 * (c2.voigt + c2.voigt.T)) > 0)
