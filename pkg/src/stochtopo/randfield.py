"""Random two-phase microstructures from level-cut periodic Gaussian fields.

A zero-mean, T-periodic Gaussian random field is synthesized as a truncated
Fourier series

    psi(r) = sum_{l,m,n=-N..N} c_{lmn} exp(i f_{lmn} . r),
    f_{lmn} = (2*pi/T) (l, m, n),      N = K*T/(2*pi),

with complex coefficients c = a + i b whose real/imaginary parts are
independent zero-mean Gaussians of variance

    E[a^2] = E[b^2] = (1/2) * S_K(|f|) * (2*pi/T)^3.

S_K is the spectral density of the squared-exponential correlation
exp(-||r1 - r2||^2 / ell^2), cut off at wavenumber K and renormalized so the
retained spectral mass integrates to one; the synthesized field therefore
has unit variance in the K -> infinity limit.  Conjugate symmetry
c_{-l,-m,-n} = conj(c_{lmn}) is enforced by sampling one half of the mode
lattice and mirroring, which makes the evaluated field strictly real.

Thresholding the field at zero yields a binary microstructure: cells with
psi > 0 form the stiff phase, the rest the compliant phase.  Planar
microstructures are cross sections of the 3D field, never natively 2D.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .streams import RandomStream

__all__ = [
    "SpectralField",
    "RveImage",
    "FiberRealization",
    "FiberBounds",
    "sample_spectral_coefficients",
    "evaluate_field",
    "evaluate_field_slice",
    "level_cut",
    "slice_2d",
    "sample_fiber",
    "spectral_density",
    "truncated_spectral_density",
]


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients of one truncated periodic Gaussian field.

    ``coeff_a`` and ``coeff_b`` are full ``(2N+1)^3`` cubes indexed by
    ``l + N, m + N, n + N``; entry ``(0,0,0)`` (the DC mode) is exactly zero
    and modes with ``|f| >= max_wavenumber`` are exactly zero.
    """

    period: float
    max_wavenumber: float
    half_terms: int
    coeff_a: np.ndarray
    coeff_b: np.ndarray
    correlation_length: float = 1.0

    def coefficient_std(self) -> np.ndarray:
        """Per-mode sampling standard deviation over the full lattice."""
        fmag = mode_magnitudes(self.period, self.half_terms)
        return _mode_std(fmag, self.period, self.max_wavenumber,
                         self.correlation_length)


@dataclass(frozen=True)
class RveImage:
    """Binary voxel/pixel image of a two-phase microstructure.

    ``phase`` is boolean with True marking the stiff phase.
    """

    phase: np.ndarray

    def __post_init__(self):
        if self.phase.dtype != np.bool_:
            raise ValueError("phase must be a boolean array")
        if self.phase.ndim not in (2, 3):
            raise ValueError("phase must have 2 or 3 axes")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.phase.shape

    @property
    def volume_fraction(self) -> float:
        """Fraction of cells in the stiff phase."""
        return float(np.count_nonzero(self.phase)) / self.phase.size


@dataclass(frozen=True)
class FiberRealization:
    """One draw of the uncertain chopped-fiber parameters."""

    e_fiber: float
    e_matrix: float
    nu_fiber: float
    nu_matrix: float
    aspect_ratio: float
    angle_inplane: float
    angle_outplane: float
    volume_fraction: float

    def __post_init__(self):
        if self.e_fiber <= 0.0 or self.e_matrix <= 0.0:
            raise ValueError("moduli must be positive")
        if not 0.0 < self.volume_fraction < 1.0:
            raise ValueError("volume fraction must lie in (0, 1)")
        if self.aspect_ratio < 1.0:
            raise ValueError("aspect ratio must be >= 1")
        for ang in (self.angle_inplane, self.angle_outplane):
            if not 0.0 <= ang <= np.pi:
                raise ValueError("angles must lie in [0, pi]")


@dataclass(frozen=True)
class FiberBounds:
    """Uniform sampling ranges for the fiber parameters (angles in radians)."""

    e_fiber: tuple[float, float] = (0.95, 1.05)
    e_matrix: tuple[float, float] = (0.0095, 0.0105)
    aspect_ratio: tuple[float, float] = (10.0, 100.0)
    angle_inplane: tuple[float, float] = (0.0, np.pi)
    angle_outplane: tuple[float, float] = (0.0, np.pi)
    nu_fiber: float = 0.3
    nu_matrix: float = 0.3
    volume_fraction: float = 0.2

    def __post_init__(self):
        for name in ("e_fiber", "e_matrix", "aspect_ratio",
                     "angle_inplane", "angle_outplane"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: lower bound {lo} exceeds upper {hi}")


# ---------------------------------------------------------------------------
# spectral density
# ---------------------------------------------------------------------------

def spectral_density(f, correlation_length: float = 1.0):
    """Spectral density of the squared-exponential correlation.

    With correlation exp(-||r||^2 / ell^2) the density is
    ell^3 * exp(-(f*ell)^2 / 4) / (4*pi)^(3/2), normalized so that
    the full-space integral of 4*pi*f^2*S equals one.
    """
    ell = correlation_length
    return ell**3 * np.exp(-0.25 * (np.asarray(f) * ell) ** 2) / (4.0 * np.pi) ** 1.5


def _retained_spectral_mass(max_wavenumber: float, correlation_length: float) -> float:
    # int_0^K 4 pi f^2 S(f) df  =  erf(X) - (2 X / sqrt(pi)) exp(-X^2),
    # X = K * ell / 2 (closed form of the Gaussian radial integral).
    x = 0.5 * max_wavenumber * correlation_length
    return float(erf(x) - 2.0 * x / np.sqrt(np.pi) * np.exp(-x * x))


def truncated_spectral_density(f, max_wavenumber: float,
                               correlation_length: float = 1.0):
    """Density renormalized over the retained band ``f < K`` (zero beyond)."""
    mass = _retained_spectral_mass(max_wavenumber, correlation_length)
    s = spectral_density(f, correlation_length) / mass
    return np.where(np.asarray(f) < max_wavenumber, s, 0.0)


def _mode_std(fmag, period, max_wavenumber, correlation_length):
    var = 0.5 * truncated_spectral_density(fmag, max_wavenumber,
                                           correlation_length) \
        * (2.0 * np.pi / period) ** 3
    return np.sqrt(var)


def mode_magnitudes(period: float, half_terms: int) -> np.ndarray:
    """|f_{lmn}| over the full (2N+1)^3 lattice."""
    idx = np.arange(-half_terms, half_terms + 1)
    l, m, n = np.meshgrid(idx, idx, idx, indexing="ij")
    return (2.0 * np.pi / period) * np.sqrt(l * l + m * m + n * n)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def sample_spectral_coefficients(period: float, max_wavenumber: float,
                                 stream: RandomStream,
                                 correlation_length: float = 1.0) -> SpectralField:
    """Draw the Fourier coefficients of one random-field realization.

    ``N = K*T/(2*pi)`` must round to an integer >= 1.  One half of the mode
    lattice -- lexicographic (l, m, n) with l > 0, or l = 0 and m > 0, or
    l = m = 0 and n > 0 -- is sampled with a consumed before b per mode;
    the other half is the mirrored complex conjugate.  The DC mode is zero.
    """
    if period <= 0.0 or max_wavenumber <= 0.0:
        raise ValueError("period and max wavenumber must be positive")
    if correlation_length <= 0.0:
        raise ValueError("correlation length must be positive")
    n_float = max_wavenumber * period / (2.0 * np.pi)
    n_half = int(round(n_float))
    if n_half < 1 or abs(n_float - n_half) > 1e-9 * max(1.0, n_float):
        raise ValueError(
            f"K*T/(2*pi) = {n_float} must round to an integer >= 1; "
            "choose a commensurate period/wavenumber pair")

    idx = np.arange(-n_half, n_half + 1)
    l, m, n = np.meshgrid(idx, idx, idx, indexing="ij")
    fmag = (2.0 * np.pi / period) * np.sqrt(l * l + m * m + n * n)
    half = (l > 0) | ((l == 0) & (m > 0)) | ((l == 0) & (m == 0) & (n > 0))
    active = half & (fmag < max_wavenumber)

    sigma = _mode_std(fmag[active], period, max_wavenumber, correlation_length)
    draws = stream.generator().standard_normal((sigma.size, 2))
    shape = (2 * n_half + 1,) * 3
    a_half = np.zeros(shape)
    b_half = np.zeros(shape)
    a_half[active] = sigma * draws[:, 0]
    b_half[active] = sigma * draws[:, 1]

    # mirror: a even, b odd under (l,m,n) -> (-l,-m,-n); supports disjoint
    coeff_a = a_half + a_half[::-1, ::-1, ::-1]
    coeff_b = b_half - b_half[::-1, ::-1, ::-1]
    return SpectralField(period=period, max_wavenumber=max_wavenumber,
                         half_terms=n_half, coeff_a=coeff_a, coeff_b=coeff_b,
                         correlation_length=correlation_length)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _evaluate_at(field: SpectralField, coords: list[np.ndarray]) -> np.ndarray:
    """Evaluate the series on the tensor grid coords[0] x coords[1] x coords[2].

    The triple sum is separable, so it reduces to three tensor
    contractions with per-axis phase matrices; this matches the direct
    mode-by-mode summation to machine precision.
    """
    freqs = 2.0 * np.pi / field.period * np.arange(-field.half_terms,
                                                   field.half_terms + 1)
    c = field.coeff_a + 1j * field.coeff_b
    ez = np.exp(1j * np.outer(freqs, coords[2]))
    ey = np.exp(1j * np.outer(freqs, coords[1]))
    ex = np.exp(1j * np.outer(freqs, coords[0]))
    t = np.tensordot(c, ez, axes=([2], [0]))       # (L, M, nz)
    t = np.tensordot(t, ey, axes=([1], [0]))       # (L, nz, ny)
    t = np.tensordot(t, ex, axes=([0], [0]))       # (nz, ny, nx)
    return np.ascontiguousarray(t.real.transpose(2, 1, 0))


def _cell_centers(period: float, count: int) -> np.ndarray:
    return (np.arange(count) + 0.5) * (period / count)


def evaluate_field(field: SpectralField, dims) -> np.ndarray:
    """Sample the field at cell centers of a grid spanning one period.

    Parameters
    ----------
    field : SpectralField
    dims : sequence of 3 ints
        Cells per axis; the grid covers [0, T) per axis.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise ValueError("dims must be three positive integers")
    coords = [_cell_centers(field.period, d) for d in dims]
    return _evaluate_at(field, coords)


def evaluate_field_slice(field: SpectralField, dims, axis: int = 2,
                         plane: int = 0, plane_resolution: int | None = None
                         ) -> np.ndarray:
    """Sample one axis-aligned cross section of the field.

    Equivalent to evaluating the full 3D grid and extracting plane ``plane``
    along ``axis``, but without the cubic cost.  ``plane_resolution`` sets
    the notional cell count along the sliced axis (defaults to ``dims[0]``,
    giving the cross section of a cubic grid); plane 0 is the cell layer
    nearest the origin.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != 2 or any(d < 1 for d in dims):
        raise ValueError("dims must be two positive integers")
    if axis not in (0, 1, 2):
        raise ValueError("axis must be 0, 1, or 2")
    res = int(plane_resolution) if plane_resolution is not None else dims[0]
    if not 0 <= plane < res:
        raise IndexError(f"plane {plane} outside [0, {res})")
    centers = _cell_centers(field.period, res)
    coords = [None, None, None]
    coords[axis] = centers[plane:plane + 1]
    in_plane = [ax for ax in range(3) if ax != axis]
    for ax, d in zip(in_plane, dims):
        coords[ax] = _cell_centers(field.period, d)
    grid = _evaluate_at(field, coords)
    return np.squeeze(grid, axis=axis)


# ---------------------------------------------------------------------------
# level cut, slicing, fibers
# ---------------------------------------------------------------------------

def level_cut(field_grid: np.ndarray, threshold: float = 0.0) -> RveImage:
    """Binary image with the stiff phase where the field exceeds ``threshold``.

    Strict inequality: cells exactly at the threshold are compliant.
    """
    grid = np.asarray(field_grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise ValueError("field grid contains non-finite values")
    return RveImage(phase=grid > threshold)


def slice_2d(rve: RveImage, axis: int = 2, plane: int = 0) -> RveImage:
    """Planar cross section of a 3D image along ``axis`` at index ``plane``."""
    if rve.phase.ndim != 3:
        raise ValueError("slice_2d expects a 3D image")
    if not 0 <= plane < rve.phase.shape[axis]:
        raise IndexError(
            f"plane {plane} outside [0, {rve.phase.shape[axis]}) on axis {axis}")
    return RveImage(phase=np.take(rve.phase, plane, axis=axis))


def sample_fiber(bounds: FiberBounds, stream: RandomStream) -> FiberRealization:
    """Independent uniform draws for each uncertain fiber parameter.

    Draw order: fiber modulus, matrix modulus, aspect ratio, in-plane
    angle, out-of-plane angle.
    """
    rng = stream.generator()
    return FiberRealization(
        e_fiber=float(rng.uniform(*bounds.e_fiber)),
        e_matrix=float(rng.uniform(*bounds.e_matrix)),
        nu_fiber=bounds.nu_fiber,
        nu_matrix=bounds.nu_matrix,
        aspect_ratio=float(rng.uniform(*bounds.aspect_ratio)),
        angle_inplane=float(rng.uniform(*bounds.angle_inplane)),
        angle_outplane=float(rng.uniform(*bounds.angle_outplane)),
        volume_fraction=bounds.volume_fraction,
    )
