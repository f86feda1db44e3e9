"""Objective and constraint functionals of one macroscale design.

For a design theta, a microstructure layout xi, and a calibrated
normalizer psi0, the scalar objective is

    f(theta; xi) = w_psi * Psi(theta; xi) / psi0
                 + w_mass * M(theta) / M0
                 + w_per * P_per(theta) + w_reg * P_reg(theta),

with the mass constraint g(theta) = M(theta)/M0 - gamma_req <= 0.  Psi is
the strain energy F.u of the layout solve; the mass ratio counts material
through the smoothed indicator H_eps(-phibar) without the ersatz floor;
P_per is the smoothed-delta interface length over the domain perimeter;
P_reg penalizes deviation of the filtered field from a truncated signed
distance field in value and gradient.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import MicrostructureCatalog
from .design import (
    ErsatzParams,
    LevelSetDesign,
    build_filter_matrix,
    density_from_levelset,
    redistance,
    smoothed_delta,
    smoothed_heaviside,
)
from .macro import MacroMesh, StiffnessModel
from .rvefem import scalar_quadrature

__all__ = ["ObjectiveWeights", "EvalResult", "PreparedDesign", "MacroProblem"]


@dataclass(frozen=True)
class ObjectiveWeights:
    w_psi: float = 0.9
    w_mass: float = 0.0
    w_per: float = 0.025
    w_reg: float = 0.5

    def __post_init__(self):
        if min(self.w_psi, self.w_mass, self.w_per, self.w_reg) < 0.0:
            raise ValueError("weights must be >= 0")


@dataclass(frozen=True)
class EvalResult:
    """All functional values of one (design, layout) evaluation."""

    strain_energy: float
    mass_ratio: float
    p_per: float
    p_reg: float
    objective: float
    constraint: float
    displacement: np.ndarray

    def __post_init__(self):
        if self.strain_energy < 0.0:
            raise ValueError("strain energy must be nonnegative")
        if not 0.0 <= self.mass_ratio <= 1.0:
            raise ValueError("mass ratio must lie in [0, 1]")


@dataclass(frozen=True)
class PreparedDesign:
    """Layout-independent quantities of one design evaluation."""

    theta: np.ndarray
    phibar: np.ndarray
    phibar_elem: np.ndarray
    rho: np.ndarray
    mass_ratio: float
    p_per: float
    p_reg: float
    phitilde: np.ndarray


class MacroProblem:
    """One optimization problem: mesh, catalog, functionals, normalizer.

    ``psi0`` defaults to 1 and is normally set once from the mean strain
    energy of the initial design (see ``calibrate_psi0``).
    """

    def __init__(self, mesh: MacroMesh, catalog: MicrostructureCatalog,
                 design: LevelSetDesign,
                 weights: ObjectiveWeights = ObjectiveWeights(),
                 gamma_req: float = 0.4,
                 ersatz: ErsatzParams = ErsatzParams(),
                 trunc: tuple[float, float] | None = None):
        self.mesh = mesh
        self.catalog = catalog
        self.design = design
        self.weights = weights
        self.gamma_req = gamma_req
        self.ersatz = ersatz
        self.trunc = trunc if trunc is not None else (design.lower, design.upper)
        self.psi0 = 1.0

        self.model = StiffnessModel(mesh=mesh, catalog=catalog)
        self.filter = build_filter_matrix(mesh.node_coords(),
                                          design.filter_radius)
        self.conn = mesh.element_nodes()
        self.shape_vals, self.shape_grads, self.quad_w = scalar_quadrature(
            2, mesh.h)
        lx, ly = mesh.extent
        self.perimeter = 2.0 * (lx + ly)
        self.area = lx * ly
        self.eps = ersatz.smoothing_width * mesh.h

    # -- field plumbing ----------------------------------------------------

    def filtered(self, theta: np.ndarray) -> np.ndarray:
        return self.filter @ theta

    def gauss_values(self, nodal: np.ndarray):
        """Values and gradients of a nodal field at all Gauss points."""
        elem = nodal[self.conn]                            # (n_e, 4)
        vals = elem @ self.shape_vals.T                    # (n_e, n_g)
        grads = np.einsum("en,gdn->egd", elem, self.shape_grads)
        return vals, grads

    # -- functionals --------------------------------------------------------

    def mass_ratio(self, phibar_elem: np.ndarray) -> float:
        return float(np.mean(smoothed_heaviside(-phibar_elem, self.eps)))

    def perimeter_penalty(self, phibar: np.ndarray) -> float:
        vals, grads = self.gauss_values(phibar)
        gnorm = np.linalg.norm(grads, axis=2)
        integrand = smoothed_delta(vals, self.eps) * gnorm
        return float(np.sum(integrand * self.quad_w[None, :]) / self.perimeter)

    def regularization_penalty(self, phibar: np.ndarray,
                               phitilde: np.ndarray) -> float:
        lo, hi = self.trunc
        w = 1.0 / self.perimeter
        vals_b, grads_b = self.gauss_values(phibar)
        vals_t, grads_t = self.gauss_values(phitilde)
        value_term = np.sum((vals_b - vals_t) ** 2 * self.quad_w[None, :]) \
            / ((hi - lo) ** 2 * self.area)
        grad_term = np.sum(np.sum((grads_b - grads_t) ** 2, axis=2)
                           * self.quad_w[None, :]) / self.area
        return float(w * (value_term + grad_term))

    def redistanced(self, phibar: np.ndarray) -> np.ndarray:
        return redistance(phibar, self.mesh.nodal_grid_shape(), self.mesh.h,
                          self.trunc)

    # -- evaluation ----------------------------------------------------------

    def prepare(self, theta: np.ndarray) -> PreparedDesign:
        """Precompute every layout-independent quantity of a design."""
        phibar = self.filtered(theta)
        phibar_elem = phibar[self.conn].mean(axis=1)
        rho = density_from_levelset(phibar_elem, self.ersatz, self.mesh.h)
        phitilde = self.redistanced(phibar)
        return PreparedDesign(
            theta=theta, phibar=phibar, phibar_elem=phibar_elem, rho=rho,
            mass_ratio=self.mass_ratio(phibar_elem),
            p_per=self.perimeter_penalty(phibar),
            p_reg=self.regularization_penalty(phibar, phitilde),
            phitilde=phitilde)

    def solve_layout(self, prep: PreparedDesign, layout: np.ndarray):
        """Strain energy and displacements of one layout on a design."""
        u = self.model.solve(prep.rho, layout)
        return self.model.strain_energy(u), u

    def objective_value(self, psi: float, prep: PreparedDesign) -> float:
        w = self.weights
        return (w.w_psi * psi / self.psi0 + w.w_mass * prep.mass_ratio
                + w.w_per * prep.p_per + w.w_reg * prep.p_reg)

    def evaluate(self, theta: np.ndarray, layout: np.ndarray,
                 prep: PreparedDesign | None = None) -> EvalResult:
        if prep is None:
            prep = self.prepare(theta)
        psi, u = self.solve_layout(prep, layout)
        return EvalResult(
            strain_energy=psi,
            mass_ratio=prep.mass_ratio,
            p_per=prep.p_per,
            p_reg=prep.p_reg,
            objective=self.objective_value(psi, prep),
            constraint=prep.mass_ratio - self.gamma_req,
            displacement=u)

    def calibrate_psi0(self, theta: np.ndarray, layouts) -> float:
        """Set psi0 to the mean strain energy of ``theta`` over ``layouts``."""
        prep = self.prepare(theta)
        energies = [self.solve_layout(prep, lay)[0] for lay in layouts]
        self.psi0 = float(np.mean(energies))
        return self.psi0
