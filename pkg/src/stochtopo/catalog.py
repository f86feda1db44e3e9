"""Catalogs of homogenized constitutive tensors.

A catalog is the discrete sample space of per-element material behavior:
``count`` independent microstructure realizations, each homogenized once,
stored as Voigt matrices with provenance.  Entries are generated from
purpose-scoped substreams so catalog construction can run entries in
parallel without changing the result.

Catalog file format (little endian):

    magic   4 bytes   b"CTLG"
    dim     uint32    2 or 3
    count   uint32    number of entries
    data    count * k * k float64, row major, k = 3 (2D) or 6 (3D)

A text manifest with the generator descriptor, seed, and phase moduli is
written alongside as ``<path>.manifest.txt``.
"""
from __future__ import annotations

import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .elastic import (
    PLANE_STRESS,
    THREE_D,
    ConstitutiveTensor,
    IsotropicPhase,
    reduce_to_plane,
)
from .moritanaka import mori_tanaka
from .randfield import (
    FiberBounds,
    evaluate_field,
    evaluate_field_slice,
    level_cut,
    sample_fiber,
    sample_spectral_coefficients,
)
from .rvefem import homogenize_fe
from .streams import RandomStream

__all__ = [
    "RandomFieldGenerator",
    "FiberGenerator",
    "MicrostructureCatalog",
    "build_catalog",
    "save_catalog",
    "load_catalog",
]

_MAGIC = b"CTLG"


@dataclass(frozen=True)
class RandomFieldGenerator:
    """Level-cut random-field microstructures homogenized by finite elements.

    ``dim = 2`` homogenizes the cross section of the 3D field nearest the
    origin on a ``resolution^2`` grid; ``dim = 3`` uses the full
    ``resolution^3`` cube.
    """

    period: float
    max_wavenumber: float
    stiff: IsotropicPhase
    compliant: IsotropicPhase
    resolution: int = 100
    dim: int = 2
    hypothesis: str = PLANE_STRESS
    correlation_length: float = 1.0

    def realize(self, stream: RandomStream) -> ConstitutiveTensor:
        fld = sample_spectral_coefficients(self.period, self.max_wavenumber,
                                           stream, self.correlation_length)
        if self.dim == 2:
            grid = evaluate_field_slice(fld, (self.resolution, self.resolution))
        else:
            grid = evaluate_field(fld, (self.resolution,) * 3)
        image = level_cut(grid)
        return homogenize_fe(image, self.stiff, self.compliant,
                             self.hypothesis)

    def describe(self) -> str:
        return (f"random_field(T={self.period:g}, K={self.max_wavenumber:g}, "
                f"resolution={self.resolution}, dim={self.dim}, "
                f"hypothesis={self.hypothesis}, "
                f"ell={self.correlation_length:g}, "
                f"E_stiff={self.stiff.e:g}, nu_stiff={self.stiff.nu:g}, "
                f"E_compliant={self.compliant.e:g}, "
                f"nu_compliant={self.compliant.nu:g})")


@dataclass(frozen=True)
class FiberGenerator:
    """Chopped-fiber microstructures homogenized by the mean-field estimate.

    Entries are 3D tensors; with ``dim = 2`` each is reduced to the plane
    under ``hypothesis`` so the catalog can feed a planar macroscale model.
    """

    bounds: FiberBounds = field(default_factory=FiberBounds)
    dim: int = 3
    hypothesis: str = THREE_D

    def realize(self, stream: RandomStream) -> ConstitutiveTensor:
        fiber = sample_fiber(self.bounds, stream)
        tensor = mori_tanaka(fiber)
        if self.dim == 2:
            tensor = reduce_to_plane(tensor, self.hypothesis)
        return tensor

    def describe(self) -> str:
        b = self.bounds
        return (f"fiber(E_f={b.e_fiber}, E_m={b.e_matrix}, "
                f"aspect={b.aspect_ratio}, v_f={b.volume_fraction:g}, "
                f"dim={self.dim}, hypothesis={self.hypothesis})")


@dataclass(frozen=True)
class MicrostructureCatalog:
    """Ordered list of constitutive tensors with per-entry provenance."""

    entries: tuple[ConstitutiveTensor, ...]
    provenance: tuple[str, ...]
    density: np.ndarray

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ValueError("catalog needs at least one entry")
        dims = {e.dim for e in self.entries}
        if len(dims) != 1:
            raise ValueError("catalog entries must share the same dimension")
        if len(self.density) != len(self.entries):
            raise ValueError("one density per entry required")

    @property
    def dim(self) -> int:
        return self.entries[0].dim

    def __len__(self) -> int:
        return len(self.entries)

    def voigt_stack(self) -> np.ndarray:
        """All entries as one (count, k, k) array."""
        return np.stack([e.voigt for e in self.entries])


def build_catalog(count: int, generator, stream: RandomStream,
                  workers: int = 1) -> MicrostructureCatalog:
    """Generate and homogenize ``count`` independent realizations.

    Entry ``i`` draws from ``stream.child(i)``, so the catalog is
    independent of ``workers``.  Non-physical (non-SPD) entries abort the
    build with the offending index.
    """
    if count < 1:
        raise ValueError("count must be >= 1")

    def one(i: int) -> ConstitutiveTensor:
        try:
            tensor = generator.realize(stream.child(i))
        except Exception as exc:
            raise RuntimeError(f"catalog entry {i} failed: {exc}") from exc
        if not tensor.is_symmetric() or not tensor.is_positive_definite():
            raise RuntimeError(
                f"catalog entry {i} is not symmetric positive definite")
        return tensor

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = tuple(pool.map(one, range(count)))
    else:
        entries = tuple(one(i) for i in range(count))
    provenance = tuple(
        f"{generator.describe()} seed={stream.seed} stream={stream.stream_id + i}"
        for i in range(count))
    return MicrostructureCatalog(entries=entries, provenance=provenance,
                                 density=np.ones(count))


def save_catalog(catalog: MicrostructureCatalog, path, manifest_lines=()):
    """Write the binary catalog plus its text manifest sidecar."""
    k = 3 if catalog.dim == 2 else 6
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", catalog.dim, len(catalog)))
        data = catalog.voigt_stack().astype("<f8")
        assert data.shape == (len(catalog), k, k)
        fh.write(data.tobytes(order="C"))
    with open(f"{path}.manifest.txt", "w") as fh:
        fh.write(f"entries: {len(catalog)}\n")
        fh.write(f"dim: {catalog.dim}\n")
        for line in manifest_lines:
            fh.write(f"{line}\n")
        fh.write("provenance:\n")
        for p in catalog.provenance:
            fh.write(f"  - {p}\n")


def load_catalog(path) -> MicrostructureCatalog:
    """Read a catalog written by :func:`save_catalog`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
        dim, count = struct.unpack("<II", fh.read(8))
        if dim not in (2, 3):
            raise ValueError(f"{path}: unsupported dimension {dim}")
        k = 3 if dim == 2 else 6
        raw = fh.read(count * k * k * 8)
        if len(raw) != count * k * k * 8:
            raise ValueError(f"{path}: truncated catalog data")
    data = np.frombuffer(raw, dtype="<f8").reshape(count, k, k)
    entries = tuple(ConstitutiveTensor(dim=dim, voigt=data[i].copy())
                    for i in range(count))
    provenance = tuple(f"loaded from {path} entry {i}" for i in range(count))
    return MicrostructureCatalog(entries=entries, provenance=provenance,
                                 density=np.ones(count))
