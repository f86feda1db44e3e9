import numpy as np
import pytest

from stochtopo.catalog import (
    FiberGenerator,
    MicrostructureCatalog,
    RandomFieldGenerator,
    build_catalog,
    load_catalog,
    save_catalog,
)
from stochtopo.elastic import PLANE_STRESS, IsotropicPhase, isotropic_tensor
from stochtopo.randfield import FiberBounds
from stochtopo.streams import RandomStream


def small_generator(resolution=24):
    return RandomFieldGenerator(period=4.0 * np.pi, max_wavenumber=4.0,
                                stiff=IsotropicPhase(10.0, 0.3),
                                compliant=IsotropicPhase(1.0, 0.3),
                                resolution=resolution)


class TestBuild:
    def test_count_and_provenance(self):
        cat = build_catalog(5, small_generator(), RandomStream(0, 100))
        assert len(cat) == 5
        assert len(cat.provenance) == 5
        assert all("random_field" in p for p in cat.provenance)

    def test_single_uniform_entry_equals_phase(self):
        # degenerate "random field" with identical phases on both sides
        phase = IsotropicPhase(2.0, 0.3)
        gen = RandomFieldGenerator(period=2.0 * np.pi, max_wavenumber=2.0,
                                   stiff=phase, compliant=phase, resolution=8)
        cat = build_catalog(1, gen, RandomStream(1))
        ref = isotropic_tensor(phase, 2, PLANE_STRESS).voigt
        np.testing.assert_allclose(cat.entries[0].voigt, ref,
                                   atol=1e-8 * np.max(np.abs(ref)))

    def test_determinism(self):
        a = build_catalog(4, small_generator(), RandomStream(7, 50))
        b = build_catalog(4, small_generator(), RandomStream(7, 50))
        np.testing.assert_array_equal(a.voigt_stack(), b.voigt_stack())

    def test_workers_do_not_change_result(self):
        a = build_catalog(6, small_generator(16), RandomStream(3), workers=1)
        b = build_catalog(6, small_generator(16), RandomStream(3), workers=4)
        np.testing.assert_array_equal(a.voigt_stack(), b.voigt_stack())

    def test_fiber_generator_2d(self):
        gen = FiberGenerator(bounds=FiberBounds(), dim=2,
                             hypothesis=PLANE_STRESS)
        cat = build_catalog(3, gen, RandomStream(9))
        assert cat.dim == 2
        for e in cat.entries:
            assert e.is_positive_definite()

    def test_failing_entry_reports_index(self):
        class Broken:
            def realize(self, stream):
                raise ValueError("boom")

            def describe(self):
                return "broken"

        with pytest.raises(RuntimeError, match="entry 0"):
            build_catalog(2, Broken(), RandomStream(0))

    def test_non_spd_entry_aborts(self):
        from stochtopo.elastic import ConstitutiveTensor

        class Indefinite:
            def realize(self, stream):
                return ConstitutiveTensor(2, np.diag([1.0, -1.0, 1.0]))

            def describe(self):
                return "indefinite"

        with pytest.raises(RuntimeError, match="positive definite"):
            build_catalog(1, Indefinite(), RandomStream(0))

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            build_catalog(0, small_generator(), RandomStream(0))


class TestIo:
    def test_round_trip(self, tmp_path):
        cat = build_catalog(3, small_generator(16), RandomStream(2))
        path = tmp_path / "cat.ctlg"
        save_catalog(cat, path, manifest_lines=["seed: 2"])
        loaded = load_catalog(path)
        assert len(loaded) == 3
        assert loaded.dim == 2
        np.testing.assert_array_equal(loaded.voigt_stack(), cat.voigt_stack())
        manifest = (tmp_path / "cat.ctlg.manifest.txt").read_text()
        assert "seed: 2" in manifest
        assert "random_field" in manifest

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bogus.ctlg"
        path.write_bytes(b"NOPE" + b"\x00" * 16)
        with pytest.raises(ValueError, match="magic"):
            load_catalog(path)

    def test_truncated_file(self, tmp_path):
        cat = build_catalog(2, small_generator(16), RandomStream(4))
        path = tmp_path / "cat.ctlg"
        save_catalog(cat, path)
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(ValueError, match="truncated"):
            load_catalog(path)

    def test_catalog_invariants(self):
        from stochtopo.elastic import ConstitutiveTensor
        with pytest.raises(ValueError, match="at least one"):
            MicrostructureCatalog(entries=(), provenance=(),
                                  density=np.ones(0))
        e2 = ConstitutiveTensor(2, np.eye(3))
        e3 = ConstitutiveTensor(3, np.eye(6))
        with pytest.raises(ValueError, match="dimension"):
            MicrostructureCatalog(entries=(e2, e3), provenance=("a", "b"),
                                  density=np.ones(2))
