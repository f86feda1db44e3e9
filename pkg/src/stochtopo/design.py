"""Level-set design field: filtering, seeding, ersatz density, redistance.

The unfiltered nodal values theta are the design variables.  A linear
filter with weights w_ij = max(0, r_f - |x_i - x_j|) produces the working
field phibar whose zero contour is the structural boundary.  The sign
convention is void-positive: phibar > 0 is void, phibar < 0 is solid.

Instead of resolving the boundary geometrically, elements carry an ersatz
density rho = rho_min + (1 - rho_min) * H_eps(-phibar_e) built from a C^1
smoothed Heaviside of half-width eps, so void regions keep a vanishing
stiffness and every functional stays differentiable in theta.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

__all__ = [
    "LevelSetDesign",
    "ErsatzParams",
    "build_filter_matrix",
    "seed_holes",
    "smoothed_heaviside",
    "smoothed_delta",
    "smoothed_delta_prime",
    "density_from_levelset",
    "redistance",
]


@dataclass(frozen=True)
class LevelSetDesign:
    """Unfiltered nodal design values with their filter and box bounds."""

    theta: np.ndarray
    filter_radius: float
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower >= self.upper:
            raise ValueError("lower bound must be below upper bound")
        if self.filter_radius < 0.0:
            raise ValueError("filter radius must be >= 0")

    def clipped(self, theta: np.ndarray) -> np.ndarray:
        return np.clip(theta, self.lower, self.upper)

    def with_theta(self, theta: np.ndarray) -> "LevelSetDesign":
        if theta.shape != self.theta.shape:
            raise ValueError("theta length must match the design")
        return LevelSetDesign(theta=theta, filter_radius=self.filter_radius,
                              lower=self.lower, upper=self.upper)


@dataclass(frozen=True)
class ErsatzParams:
    """Smoothed-Heaviside half width (in element sizes) and void stiffness."""

    smoothing_width: float = 1.5
    void_factor: float = 1e-6

    def __post_init__(self):
        if self.smoothing_width <= 0.0:
            raise ValueError("smoothing width must be positive")
        if not 0.0 < self.void_factor < 1.0:
            raise ValueError("void factor must lie in (0, 1)")


def build_filter_matrix(coords: np.ndarray, filter_radius: float) -> sp.csr_matrix:
    """Row-normalized linear filter over nodes within ``filter_radius``.

    Returns F with phibar = F theta; rows sum to one, so constants are
    fixed points.  A zero radius gives the identity.
    """
    n = coords.shape[0]
    if filter_radius <= 0.0:
        return sp.identity(n, format="csr")
    tree = cKDTree(coords)
    pairs = tree.query_pairs(filter_radius, output_type="ndarray")
    if pairs.size == 0:
        pairs = np.empty((0, 2), dtype=int)
    d = np.linalg.norm(coords[pairs[:, 0]] - coords[pairs[:, 1]], axis=1)
    w = filter_radius - d
    keep = w > 0.0
    rows = np.concatenate([pairs[keep, 0], pairs[keep, 1], np.arange(n)])
    cols = np.concatenate([pairs[keep, 1], pairs[keep, 0], np.arange(n)])
    vals = np.concatenate([w[keep], w[keep], np.full(n, filter_radius)])
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    inv_rowsum = 1.0 / np.asarray(mat.sum(axis=1)).ravel()
    return sp.diags(inv_rowsum) @ mat


def seed_holes(coords: np.ndarray, extent: tuple[float, float],
               holes_x: int, holes_y: int, r_hole: float) -> np.ndarray:
    """Initial nodal level-set values for a regular grid of superellipse holes.

    Each hole contributes 1 - (x_loc/r)^10 - (y_loc/r)^10 in its local
    frame (positive inside, so holes are void); the field is the maximum
    over all holes.  Centers are evenly spaced on a ``holes_x x holes_y``
    grid over the domain extent.
    """
    if holes_x < 1 or holes_y < 1:
        raise ValueError("hole counts must be >= 1")
    if r_hole <= 0.0:
        raise ValueError("hole radius must be positive")
    lx, ly = extent
    cx = (np.arange(holes_x) + 0.5) * (lx / holes_x)
    cy = (np.arange(holes_y) + 0.5) * (ly / holes_y)
    theta = np.full(coords.shape[0], -np.inf)
    for x0 in cx:
        xl = (coords[:, 0] - x0) / r_hole
        for y0 in cy:
            yl = (coords[:, 1] - y0) / r_hole
            theta = np.maximum(theta, 1.0 - xl**10 - yl**10)
    return theta


# ---------------------------------------------------------------------------
# smoothed Heaviside family (C^1 polynomial)
# ---------------------------------------------------------------------------

def smoothed_heaviside(s, eps: float):
    """0 below -eps, 1 above +eps, cubic blend in between."""
    s = np.asarray(s, dtype=float)
    t = np.clip(s / eps, -1.0, 1.0)
    return 0.5 + 0.75 * t - 0.25 * t**3


def smoothed_delta(s, eps: float):
    """Derivative of :func:`smoothed_heaviside` with respect to s."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < eps
    return np.where(inside, 0.75 / eps * (1.0 - (s / eps) ** 2), 0.0)


def smoothed_delta_prime(s, eps: float):
    """Second derivative of the smoothed Heaviside."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < eps
    return np.where(inside, -1.5 * s / eps**3, 0.0)


def density_from_levelset(phibar_elem: np.ndarray, ersatz: ErsatzParams,
                          h: float) -> np.ndarray:
    """Element densities from element-averaged filtered level-set values.

    Solid (phibar < 0) tends to 1, void to ``void_factor``; the blend width
    is ``smoothing_width * h``.
    """
    eps = ersatz.smoothing_width * h
    solid = smoothed_heaviside(-phibar_elem, eps)
    return ersatz.void_factor + (1.0 - ersatz.void_factor) * solid


# ---------------------------------------------------------------------------
# truncated signed distance
# ---------------------------------------------------------------------------

def _contour_segments(grid: np.ndarray, h: float) -> np.ndarray:
    """Zero-contour segments of a bilinear nodal grid (marching squares)."""

    def cross(va, vb):
        # parametric zero crossing on an edge va -> vb
        return va / (va - vb)

    segments = []
    nx1, ny1 = grid.shape
    for i in range(nx1 - 1):
        for j in range(ny1 - 1):
            v = (grid[i, j], grid[i + 1, j], grid[i + 1, j + 1], grid[i, j + 1])
            pos = [val > 0.0 for val in v]
            if all(pos) or not any(pos):
                continue
            pts = []
            edges = ((0, 1, (i, j), (1, 0)), (1, 2, (i + 1, j), (0, 1)),
                     (3, 2, (i, j + 1), (1, 0)), (0, 3, (i, j), (0, 1)))
            for a, b, origin, direction in edges:
                if pos[a] != pos[b]:
                    t = cross(v[a], v[b])
                    pts.append((origin[0] + t * direction[0],
                                origin[1] + t * direction[1]))
            if len(pts) == 2:
                segments.append((pts[0], pts[1]))
            elif len(pts) == 4:
                # saddle: split by the cell-center sign; pts order is
                # bottom, right, top, left
                center_pos = sum(v) > 0.0
                if pos[0] == center_pos:
                    # corners 1 and 3 are isolated
                    segments.append((pts[0], pts[1]))
                    segments.append((pts[3], pts[2]))
                else:
                    # corners 0 and 2 are isolated
                    segments.append((pts[0], pts[3]))
                    segments.append((pts[1], pts[2]))
    if not segments:
        return np.empty((0, 2, 2))
    return np.asarray(segments) * h


def _point_segment_distance(points: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """Min distance from each point to any segment (brute force)."""
    a = segments[:, 0, :]
    ab = segments[:, 1, :] - a
    ab_len2 = np.maximum(np.einsum("sd,sd->s", ab, ab), 1e-300)
    best = np.full(points.shape[0], np.inf)
    chunk = max(1, 2_000_000 // max(1, segments.shape[0]))
    for start in range(0, points.shape[0], chunk):
        p = points[start:start + chunk]
        ap = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("psd,sd->ps", ap, ab) / ab_len2, 0.0, 1.0)
        closest = a[None, :, :] + t[:, :, None] * ab[None, :, :]
        d = np.linalg.norm(p[:, None, :] - closest, axis=2)
        best[start:start + chunk] = d.min(axis=1)
    return best


def redistance(phibar: np.ndarray, grid_shape: tuple[int, int], h: float,
               trunc: tuple[float, float]) -> np.ndarray:
    """Truncated signed distance to the zero contour of the filtered field.

    ``phibar`` is nodal (flattened x-major), ``grid_shape`` the nodal grid
    (nx+1, ny+1).  Distances are measured to the piecewise-linear contour,
    signed by the field's sign, and clamped to ``trunc``.  If the field
    does not change sign the clamped field itself is returned.
    """
    lo, hi = trunc
    grid = phibar.reshape(grid_shape)
    segments = _contour_segments(grid, h)
    if segments.shape[0] == 0:
        return np.clip(phibar, lo, hi)
    nx1, ny1 = grid_shape
    xs = np.arange(nx1) * h
    ys = np.arange(ny1) * h
    pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    dist = _point_segment_distance(pts, segments)
    return np.clip(np.sign(phibar) * dist, lo, hi)
