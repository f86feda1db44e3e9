import numpy as np
import pytest

from stochtopo.elastic import PLANE_STRESS, IsotropicPhase, isotropic_tensor
from stochtopo.randfield import RveImage
from stochtopo.rvefem import element_stiffness, homogenize_fe

STIFF = IsotropicPhase(10.0, 0.0)
SOFT = IsotropicPhase(1.0, 0.0)


class TestElementStiffness:
    def test_rigid_modes(self):
        c = isotropic_tensor(IsotropicPhase(1.0, 0.3), 2, PLANE_STRESS).voigt
        ke = element_stiffness(c, 2, 1.0)
        # translations in x and y produce zero force
        for mode in (np.tile([1.0, 0.0], 4), np.tile([0.0, 1.0], 4)):
            np.testing.assert_allclose(ke @ mode, 0.0, atol=1e-14)
        assert np.linalg.matrix_rank(ke, tol=1e-12) == 5

    def test_3d_rigid_modes(self):
        c = isotropic_tensor(IsotropicPhase(2.0, 0.25), 3).voigt
        ke = element_stiffness(c, 3, 1.0)
        for d in range(3):
            mode = np.zeros(24)
            mode[d::3] = 1.0
            np.testing.assert_allclose(ke @ mode, 0.0, atol=1e-13)

    def test_scaling_with_size(self):
        # 2D stiffness is size independent; 3D scales linearly with h
        c2 = isotropic_tensor(IsotropicPhase(1.0, 0.3), 2, PLANE_STRESS).voigt
        np.testing.assert_allclose(element_stiffness(c2, 2, 1.0),
                                   element_stiffness(c2, 2, 2.5), atol=1e-13)
        c3 = isotropic_tensor(IsotropicPhase(1.0, 0.3), 3).voigt
        np.testing.assert_allclose(2.5 * element_stiffness(c3, 3, 1.0),
                                   element_stiffness(c3, 3, 2.5), atol=1e-12)


class TestUniform:
    @pytest.mark.parametrize("stiff_phase", [False, True])
    def test_2d_uniform_recovers_phase(self, stiff_phase):
        img = RveImage(phase=np.full((6, 6), stiff_phase))
        got = homogenize_fe(img, STIFF, SOFT)
        phase = STIFF if stiff_phase else SOFT
        ref = isotropic_tensor(phase, 2, PLANE_STRESS).voigt
        np.testing.assert_allclose(got.voigt, ref,
                                   atol=1e-8 * np.max(np.abs(ref)))

    def test_3d_uniform_recovers_phase(self):
        img = RveImage(phase=np.ones((4, 4, 4), dtype=bool))
        phase = IsotropicPhase(3.0, 0.3)
        got = homogenize_fe(img, phase, SOFT)
        ref = isotropic_tensor(phase, 3).voigt
        np.testing.assert_allclose(got.voigt, ref,
                                   atol=1e-8 * np.max(np.abs(ref)))


class TestLaminate:
    def test_equal_fraction_laminate_bounds(self):
        # vertical layers, nu = 0: series direction is the harmonic mean,
        # parallel direction the arithmetic mean (exact for laminates)
        phase = np.zeros((64, 64), dtype=bool)
        phase[:32, :] = True
        img = RveImage(phase=phase)
        c = homogenize_fe(img, STIFF, SOFT).voigt
        harmonic = 2.0 * 10.0 * 1.0 / 11.0
        arithmetic = 5.5
        assert c[0, 0] == pytest.approx(harmonic, rel=0.01)
        assert c[1, 1] == pytest.approx(arithmetic, rel=0.01)

    def test_laminate_3d(self):
        phase = np.zeros((8, 8, 8), dtype=bool)
        phase[:4, :, :] = True
        img = RveImage(phase=phase)
        stiff3 = IsotropicPhase(10.0, 0.0)
        soft3 = IsotropicPhase(1.0, 0.0)
        c = homogenize_fe(img, stiff3, soft3).voigt
        assert c[0, 0] == pytest.approx(2.0 * 10.0 / 11.0, rel=0.01)
        assert c[1, 1] == pytest.approx(5.5, rel=0.01)
        assert c[2, 2] == pytest.approx(5.5, rel=0.01)


class TestSymmetries:
    def test_phase_relabeling(self):
        rng = np.random.default_rng(3)
        phase = rng.random((12, 12)) > 0.5
        a = homogenize_fe(RveImage(phase=phase), STIFF, SOFT)
        b = homogenize_fe(RveImage(phase=~phase), SOFT, STIFF)
        np.testing.assert_allclose(a.voigt, b.voigt, atol=1e-10)

    def test_quarter_turn_invariance(self):
        # rotating the image by 90 deg swaps the normal axes and flips the
        # sign of the normal-shear couplings
        rng = np.random.default_rng(4)
        phase = rng.random((32, 32)) > 0.5
        c = homogenize_fe(RveImage(phase=phase), STIFF, SOFT).voigt
        rot = homogenize_fe(RveImage(phase=np.rot90(phase).copy()),
                            STIFF, SOFT).voigt
        expected = np.array([[c[1, 1], c[0, 1], -c[1, 2]],
                             [c[1, 0], c[0, 0], -c[0, 2]],
                             [-c[2, 1], -c[2, 0], c[2, 2]]])
        np.testing.assert_allclose(rot, expected,
                                   atol=1e-8 * np.max(np.abs(c)))

    def test_reuss_voigt_bounds_on_random_images(self):
        stiff = IsotropicPhase(10.0, 0.3)
        soft = IsotropicPhase(1.0, 0.3)
        cs = isotropic_tensor(stiff, 2, PLANE_STRESS).voigt
        cc = isotropic_tensor(soft, 2, PLANE_STRESS).voigt
        rng = np.random.default_rng(5)
        for _ in range(3):
            phase = rng.random((24, 24)) > 0.5
            img = RveImage(phase=phase)
            c = homogenize_fe(img, stiff, soft).voigt
            vf = img.volume_fraction
            for i in range(3):
                upper = vf * cs[i, i] + (1.0 - vf) * cc[i, i]
                lower = 1.0 / (vf / cs[i, i] + (1.0 - vf) / cc[i, i])
                assert c[i, i] <= 1.01 * upper
                assert c[i, i] >= 0.99 * lower

    def test_spd(self):
        rng = np.random.default_rng(6)
        phase = rng.random((16, 16)) > 0.5
        c = homogenize_fe(RveImage(phase=phase), IsotropicPhase(10.0, 0.3),
                          IsotropicPhase(1.0, 0.3))
        assert c.is_symmetric()
        assert c.is_positive_definite()

    def test_checkerboard_square_symmetry(self):
        i, j = np.meshgrid(np.arange(8), np.arange(8), indexing="ij")
        img = RveImage(phase=((i + j) % 2 == 0))
        c = homogenize_fe(img, STIFF, SOFT).voigt
        assert c[0, 0] == pytest.approx(c[1, 1], rel=1e-8)
