"""First-order computational homogenization of pixel/voxel microstructures.

For each independent unit macroscopic strain, the periodic fluctuation
problem is solved on a structured grid of bilinear (2D) or trilinear (3D)
elements, one element per image cell:

    sigma = C(x') : (ebar + eps*(x')),   div(sigma) = 0,
    u* periodic,  sigma.n anti-periodic.

Periodicity is imposed by identifying paired boundary nodes, which makes
the mesh a torus with one node per cell; pinning the displacement of one
node removes the rigid translations (rotations are not periodic, so the
pinned operator is nonsingular).  The homogenized stiffness column for
load case k is the volume-averaged stress; the result is symmetrized by
averaging with its transpose.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .elastic import (
    PLANE_STRESS,
    ConstitutiveTensor,
    IsotropicPhase,
    isotropic_tensor,
)
from .randfield import RveImage

__all__ = ["element_matrices", "element_stiffness", "homogenize_fe",
           "scalar_quadrature"]

_GAUSS_1D = (-1.0 / np.sqrt(3.0), 1.0 / np.sqrt(3.0))

# local corner coordinates, counterclockwise (2D) / bottom then top face (3D)
_CORNERS_2D = ((0, 0), (1, 0), (1, 1), (0, 1))
_CORNERS_3D = ((0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0),
               (0, 0, 1), (1, 0, 1), (1, 1, 1), (0, 1, 1))


def _shape_gradients(dim: int, point) -> tuple[np.ndarray, np.ndarray]:
    """Shape values and physical gradients at one Gauss point, unit h."""
    corners = _CORNERS_2D if dim == 2 else _CORNERS_3D
    n_nodes = len(corners)
    vals = np.empty(n_nodes)
    grads = np.empty((dim, n_nodes))
    for a, corner in enumerate(corners):
        signs = np.array([2.0 * c - 1.0 for c in corner])
        factors = 0.5 * (1.0 + signs * np.asarray(point))
        vals[a] = np.prod(factors)
        for d in range(dim):
            others = np.prod(np.delete(factors, d))
            grads[d, a] = 0.5 * signs[d] * others
    return vals, grads


def _strain_matrix(dim: int, grads: np.ndarray) -> np.ndarray:
    """Voigt strain-displacement matrix from shape gradients."""
    n_nodes = grads.shape[1]
    if dim == 2:
        b = np.zeros((3, 2 * n_nodes))
        b[0, 0::2] = grads[0]
        b[1, 1::2] = grads[1]
        b[2, 0::2] = grads[1]
        b[2, 1::2] = grads[0]
    else:
        b = np.zeros((6, 3 * n_nodes))
        b[0, 0::3] = grads[0]
        b[1, 1::3] = grads[1]
        b[2, 2::3] = grads[2]
        b[3, 1::3] = grads[2]
        b[3, 2::3] = grads[1]
        b[4, 0::3] = grads[2]
        b[4, 2::3] = grads[0]
        b[5, 0::3] = grads[1]
        b[5, 1::3] = grads[0]
    return b


def element_matrices(dim: int, h: float = 1.0):
    """Gauss-point B matrices and quadrature weights for a square/cube cell.

    Returns ``(b_list, w_list)`` where each ``b`` maps element nodal
    displacements to the Voigt strain at one Gauss point and each ``w`` is
    the quadrature weight times the Jacobian determinant.
    """
    pts = [(gx, gy) for gx in _GAUSS_1D for gy in _GAUSS_1D] if dim == 2 else \
        [(gx, gy, gz) for gx in _GAUSS_1D for gy in _GAUSS_1D for gz in _GAUSS_1D]
    det_j = (0.5 * h) ** dim
    b_list, w_list = [], []
    for p in pts:
        _, grads = _shape_gradients(dim, p)
        b_list.append(_strain_matrix(dim, grads * (2.0 / h)))
        w_list.append(det_j)
    return b_list, w_list


def scalar_quadrature(dim: int, h: float = 1.0):
    """Shape values, physical gradients, and weights at the Gauss points.

    Returns ``(vals, grads, weights)`` with shapes (n_g, n_nodes),
    (n_g, dim, n_nodes), and (n_g,), for integrating nodal scalar fields
    over one square/cube cell of size ``h``.
    """
    pts = [(gx, gy) for gx in _GAUSS_1D for gy in _GAUSS_1D] if dim == 2 else \
        [(gx, gy, gz) for gx in _GAUSS_1D for gy in _GAUSS_1D for gz in _GAUSS_1D]
    det_j = (0.5 * h) ** dim
    vals, grads = zip(*(_shape_gradients(dim, p) for p in pts))
    return (np.stack(vals), np.stack(grads) * (2.0 / h),
            np.full(len(pts), det_j))


def element_stiffness(c_voigt: np.ndarray, dim: int, h: float = 1.0) -> np.ndarray:
    """Fully integrated element stiffness for a uniform square/cube cell."""
    b_list, w_list = element_matrices(dim, h)
    nd = b_list[0].shape[1]
    ke = np.zeros((nd, nd))
    for b, w in zip(b_list, w_list):
        ke += w * (b.T @ c_voigt @ b)
    return 0.5 * (ke + ke.T)


def _torus_connectivity(shape: tuple[int, ...]) -> np.ndarray:
    """Element-to-node map of the periodic grid (one node per cell)."""
    dim = len(shape)
    if dim == 2:
        mx, my = shape
        i, j = np.meshgrid(np.arange(mx), np.arange(my), indexing="ij")

        def node(ii, jj):
            return (ii % mx) * my + (jj % my)

        nodes = [node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)]
    else:
        mx, my, mz = shape
        i, j, k = np.meshgrid(np.arange(mx), np.arange(my), np.arange(mz),
                              indexing="ij")

        def node(ii, jj, kk):
            return ((ii % mx) * my + (jj % my)) * mz + (kk % mz)

        nodes = [node(i + c[0], j + c[1], k + c[2]) for c in _CORNERS_3D]
    return np.stack([n.ravel() for n in nodes], axis=1)


def homogenize_fe(rve: RveImage, stiff: IsotropicPhase,
                  compliant: IsotropicPhase,
                  hypothesis: str = PLANE_STRESS,
                  tol: float = 1e-10) -> ConstitutiveTensor:
    """Homogenized stiffness of a binary image under periodic conditions.

    2D images are treated under the given plane hypothesis; 3D images
    ignore it.  One linear solve per independent unit strain (3 in 2D,
    6 in 3D) against a single factorization of the pinned stiffness.
    """
    dim = rve.phase.ndim
    shape = rve.phase.shape
    if any(s < 2 for s in shape):
        raise ValueError("RVE needs at least 2 cells per axis")
    n_strain = 3 if dim == 2 else 6
    hyp = hypothesis if dim == 2 else "3D"
    c_phases = np.stack([
        isotropic_tensor(compliant, dim, hyp).voigt,
        isotropic_tensor(stiff, dim, hyp).voigt,
    ])

    b_list, w_list = element_matrices(dim, 1.0)
    ke_phase = np.stack([element_stiffness(c, dim, 1.0) for c in c_phases])
    # g maps Voigt stress to consistent nodal forces; h_avg integrates strain
    g_phase = []
    h_avg = sum(w * b for b, w in zip(b_list, w_list))
    for c in c_phases:
        g_phase.append(sum(w * (b.T @ c) for b, w in zip(b_list, w_list)))
    g_phase = np.stack(g_phase)

    conn = _torus_connectivity(shape)
    phase_idx = rve.phase.ravel().astype(int)
    n_elem, n_en = conn.shape
    n_nodes = int(np.prod(shape))
    ndof = dim * n_nodes
    edof = (conn[:, :, None] * dim + np.arange(dim)[None, None, :]).reshape(
        n_elem, dim * n_en)

    ike = np.repeat(edof, dim * n_en, axis=1).ravel()
    jke = np.tile(edof, (1, dim * n_en)).ravel()
    values = ke_phase[phase_idx].ravel()
    k_full = sp.coo_matrix((values, (ike, jke)), shape=(ndof, ndof)).tocsc()

    free = np.arange(dim, ndof)  # pin node 0
    k_ff = k_full[free][:, free]
    solver = spla.factorized(k_ff)

    vol = float(n_elem)
    c_hom = np.zeros((n_strain, n_strain))
    for k in range(n_strain):
        ebar = np.zeros(n_strain)
        ebar[k] = 1.0
        f_elem = -(g_phase[phase_idx] @ ebar)
        rhs = np.zeros(ndof)
        np.add.at(rhs, edof.ravel(), f_elem.ravel())
        u = np.zeros(ndof)
        if np.linalg.norm(rhs[free]) > 0.0:
            u[free] = solver(rhs[free])
            residual = k_ff @ u[free] - rhs[free]
            rel = np.linalg.norm(residual) / np.linalg.norm(rhs[free])
            if rel > tol:
                raise RuntimeError(
                    f"periodic cell solve residual {rel:.2e} exceeds {tol}")
        u_elem = u[edof]
        strain_int = u_elem @ h_avg.T          # (n_elem, n_strain)
        strain_int += ebar[None, :]            # unit cells: V_e = 1
        stress_avg = np.einsum("ekl,el->k", c_phases[phase_idx], strain_int) / vol
        c_hom[:, k] = stress_avg
    c_hom = 0.5 * (c_hom + c_hom.T)
    return ConstitutiveTensor(dim=dim, voigt=c_hom)
