"""Structured 2D macroscale mesh, assembly, and linear solves.

Square bilinear elements on an nx-by-ny grid.  Node (ix, iy) has index
ix*(ny+1) + iy; element (ex, ey) has index ex*ny + ey and connects its
corner nodes counterclockwise from the lower left.  Supports and loads
are nodal (node, component, value) triples.

Each element's stiffness is one catalog entry's element matrix scaled by
the ersatz density, so assembling for a new microstructure layout is a
gather over a precomputed stack of matrices.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .catalog import MicrostructureCatalog
from .rvefem import element_stiffness

__all__ = ["MacroMesh", "simply_supported_half_beam", "StiffnessModel"]

_DENSE_DOF_LIMIT = 600


@dataclass(frozen=True)
class MacroMesh:
    """Regular grid of square elements with nodal supports and loads."""

    nx: int
    ny: int
    h: float
    dirichlet: tuple[tuple[int, int, float], ...]
    loads: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError("element counts must be >= 1")
        if self.h <= 0.0:
            raise ValueError("element size must be positive")
        comps = set()
        for node, comp, _ in self.dirichlet:
            if not (0 <= node < self.n_nodes and comp in (0, 1)):
                raise ValueError(f"constraint ({node}, {comp}) out of bounds")
            comps.add(comp)
        for node, comp, _ in self.loads:
            if not (0 <= node < self.n_nodes and comp in (0, 1)):
                raise ValueError(f"load ({node}, {comp}) out of bounds")
        if len(self.dirichlet) < 3 or comps != {0, 1}:
            raise ValueError(
                "need at least three constraints covering both components "
                "to remove rigid modes")

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) * (self.ny + 1)

    @property
    def n_elem(self) -> int:
        return self.nx * self.ny

    @property
    def n_dof(self) -> int:
        return 2 * self.n_nodes

    @property
    def extent(self) -> tuple[float, float]:
        return (self.nx * self.h, self.ny * self.h)

    def node(self, ix: int, iy: int) -> int:
        return ix * (self.ny + 1) + iy

    def node_coords(self) -> np.ndarray:
        ix, iy = np.meshgrid(np.arange(self.nx + 1), np.arange(self.ny + 1),
                             indexing="ij")
        return np.stack([ix.ravel() * self.h, iy.ravel() * self.h], axis=1)

    def element_nodes(self) -> np.ndarray:
        """(n_elem, 4) corner nodes, counterclockwise from lower left."""
        ex, ey = np.meshgrid(np.arange(self.nx), np.arange(self.ny),
                             indexing="ij")
        n00 = ex * (self.ny + 1) + ey
        n10 = (ex + 1) * (self.ny + 1) + ey
        return np.stack([n00.ravel(), n10.ravel(),
                         (n10 + 1).ravel(), (n00 + 1).ravel()], axis=1)

    def element_dofs(self) -> np.ndarray:
        conn = self.element_nodes()
        return (conn[:, :, None] * 2 + np.arange(2)[None, None, :]).reshape(
            self.n_elem, 8)

    def load_vector(self) -> np.ndarray:
        f = np.zeros(self.n_dof)
        for node, comp, value in self.loads:
            f[2 * node + comp] += value
        return f

    def nodal_grid_shape(self) -> tuple[int, int]:
        return (self.nx + 1, self.ny + 1)


def simply_supported_half_beam(nx: int, ny: int, length: float, height: float,
                               load: float = 1.0) -> MacroMesh:
    """Half-span model of a midspan-loaded simply supported beam.

    x = 0 is the symmetry plane (rollers blocking u_x), the bottom-right
    corner node carries the vertical roller, and half the total load is
    applied downward at the top symmetry node.
    """
    hx = length / nx
    hy = height / ny
    if abs(hx - hy) > 1e-12 * max(hx, hy):
        raise ValueError("mesh must have square elements; "
                         f"got hx={hx}, hy={hy}")
    mesh_kwargs = dict(nx=nx, ny=ny, h=hx)
    node = lambda ix, iy: ix * (ny + 1) + iy  # noqa: E731
    dirichlet = [(node(0, iy), 0, 0.0) for iy in range(ny + 1)]
    dirichlet.append((node(nx, 0), 1, 0.0))
    loads = [(node(0, ny), 1, -load)]
    return MacroMesh(dirichlet=tuple(dirichlet), loads=tuple(loads),
                     **mesh_kwargs)


@dataclass
class StiffnessModel:
    """Precomputed assembly data for repeated layout solves on one mesh.

    The per-entry element matrices, dof maps, scatter indices, load vector
    and free-dof partition depend only on (mesh, catalog) and are reused
    across every layout and density update.
    """

    mesh: MacroMesh
    catalog: MicrostructureCatalog
    ke_stack: np.ndarray = field(init=False)
    edof: np.ndarray = field(init=False)
    _free: np.ndarray = field(init=False)
    _fixed: np.ndarray = field(init=False)
    _fixed_values: np.ndarray = field(init=False)
    _f: np.ndarray = field(init=False)
    _ike: np.ndarray = field(init=False)
    _jke: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.catalog.dim != 2:
            raise ValueError("macroscale assembly requires a 2D catalog")
        self.ke_stack = np.stack([
            element_stiffness(entry.voigt, 2, self.mesh.h)
            for entry in self.catalog.entries])
        self.edof = self.mesh.element_dofs()
        fixed_dofs = {}
        for node, comp, value in self.mesh.dirichlet:
            fixed_dofs[2 * node + comp] = value
        self._fixed = np.array(sorted(fixed_dofs), dtype=int)
        self._fixed_values = np.array([fixed_dofs[d] for d in self._fixed])
        mask = np.ones(self.mesh.n_dof, dtype=bool)
        mask[self._fixed] = False
        self._free = np.nonzero(mask)[0]
        self._f = self.mesh.load_vector()
        self._ike = np.repeat(self.edof, 8, axis=1).ravel()
        self._jke = np.tile(self.edof, (1, 8)).ravel()

    @property
    def load(self) -> np.ndarray:
        return self._f

    def assemble(self, rho: np.ndarray, layout: np.ndarray):
        """Global stiffness for one density field and one layout."""
        values = self.ke_stack[layout] * rho[:, None, None]
        if self.mesh.n_dof <= _DENSE_DOF_LIMIT:
            k = np.zeros((self.mesh.n_dof, self.mesh.n_dof))
            np.add.at(k, (self._ike, self._jke), values.ravel())
            return k
        return sp.coo_matrix((values.ravel(), (self._ike, self._jke)),
                             shape=(self.mesh.n_dof, self.mesh.n_dof)).tocsc()

    def solve(self, rho: np.ndarray, layout: np.ndarray) -> np.ndarray:
        """Displacements for K(rho, layout) u = F with supports applied."""
        k = self.assemble(rho, layout)
        u = np.zeros(self.mesh.n_dof)
        u[self._fixed] = self._fixed_values
        free = self._free
        if sp.issparse(k):
            k_ff = k[free][:, free]
            rhs = self._f[free] - k[free][:, self._fixed] @ self._fixed_values
            try:
                u_free = spla.spsolve(k_ff, rhs)
            except RuntimeError as exc:
                raise RuntimeError(f"macroscale solve failed: {exc}") from exc
            resid = np.linalg.norm(k_ff @ u_free - rhs)
            scale = np.linalg.norm(rhs)
        else:
            k_ff = k[np.ix_(free, free)]
            rhs = self._f[free] - k[np.ix_(free, self._fixed)] @ self._fixed_values
            u_free = np.linalg.solve(k_ff, rhs)
            resid = np.linalg.norm(k_ff @ u_free - rhs)
            scale = np.linalg.norm(rhs)
        if scale > 0.0 and resid / scale > 1e-10:
            raise RuntimeError(
                f"macroscale solve residual {resid / scale:.2e} above 1e-10; "
                "system may be singular or badly scaled")
        u[free] = u_free
        return u

    def strain_energy(self, u: np.ndarray) -> float:
        """External work F . u (equals u^T K u for zero prescribed values)."""
        return float(self._f @ u)

    def element_energies(self, u: np.ndarray, rho: np.ndarray,
                         layout: np.ndarray) -> np.ndarray:
        """Per-element u_e^T (rho_e ke) u_e."""
        ue = u[self.edof]
        return rho * np.einsum("ei,eij,ej->e", ue, self.ke_stack[layout], ue)
