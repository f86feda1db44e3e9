"""Design gradients of all functionals, and their finite-difference check.

Compliance is self-adjoint, so for one layout

    dPsi/drho_e = -(1/rho_e) u_e^T k_e u_e,

chained through the smoothed-Heaviside density, the element nodal average,
and the transpose of the level-set filter.  Mass, perimeter, and
regularization are differentiated analytically through the same chain; the
redistanced target field inside the regularization term is treated as a
frozen constant, so its gradient (and the finite-difference oracle for it)
hold the target fixed at the expansion design.

Small-batch estimates average per-layout values and gradients over the
given layouts in order, which keeps the reduction deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .objective import MacroProblem, PreparedDesign
from .design import smoothed_delta, smoothed_delta_prime

__all__ = [
    "GradientBundle",
    "MeanBundle",
    "grad_strain_energy",
    "grad_mass",
    "grad_perimeter",
    "grad_regularization",
    "layout_gradient",
    "stochastic_gradient_bundle",
    "fd_check",
    "FUNCTIONALS",
]

_GRAD_FLOOR = 1e-30


@dataclass(frozen=True)
class GradientBundle:
    """Objective/constraint values and theta-gradients for one layout."""

    objective: float
    strain_energy: float
    constraints: np.ndarray
    d_objective: np.ndarray
    d_constraints: np.ndarray
    layout_id: int = -1

    def __post_init__(self):
        if not np.all(np.isfinite(self.d_objective)):
            raise ValueError("objective gradient has non-finite entries")
        if not np.all(np.isfinite(self.d_constraints)):
            raise ValueError("constraint gradient has non-finite entries")


@dataclass(frozen=True)
class MeanBundle:
    """Layout-averaged values and gradients plus the per-layout raw values."""

    objective: float
    constraints: np.ndarray
    d_objective: np.ndarray
    d_constraints: np.ndarray
    per_layout_objective: np.ndarray
    per_layout_constraints: np.ndarray
    per_layout_energy: np.ndarray


def _scatter_to_nodes(problem: MacroProblem, elem_vals: np.ndarray) -> np.ndarray:
    """Accumulate per-element nodal contributions into the nodal vector."""
    nodal = np.zeros(problem.mesh.n_nodes)
    np.add.at(nodal, problem.conn, elem_vals)
    return nodal


def _through_filter(problem: MacroProblem, d_phibar: np.ndarray) -> np.ndarray:
    return problem.filter.T @ d_phibar


def _density_chain(problem: MacroProblem, prep: PreparedDesign,
                   d_rho: np.ndarray) -> np.ndarray:
    """Chain d/drho_e into d/dtheta via density, nodal average, filter."""
    drho_dphibar = -(1.0 - problem.ersatz.void_factor) * smoothed_delta(
        -prep.phibar_elem, problem.eps)
    per_elem = d_rho * drho_dphibar * 0.25
    return _through_filter(problem, _scatter_to_nodes(
        problem, np.repeat(per_elem[:, None], 4, axis=1)))


def grad_strain_energy(problem: MacroProblem, prep: PreparedDesign,
                       layout: np.ndarray, u: np.ndarray) -> np.ndarray:
    """d(F.u)/dtheta for a converged solve of this (design, layout)."""
    unit_energy = problem.model.element_energies(
        u, np.ones(problem.mesh.n_elem), layout)
    return _density_chain(problem, prep, -unit_energy)


def grad_mass(problem: MacroProblem, prep: PreparedDesign) -> np.ndarray:
    """d(mass_ratio)/dtheta (no ersatz floor in the mass indicator)."""
    d_dphibar = -smoothed_delta(-prep.phibar_elem, problem.eps) \
        / problem.mesh.n_elem
    per_elem = d_dphibar * 0.25
    return _through_filter(problem, _scatter_to_nodes(
        problem, np.repeat(per_elem[:, None], 4, axis=1)))


def grad_perimeter(problem: MacroProblem, prep: PreparedDesign) -> np.ndarray:
    vals, grads = problem.gauss_values(prep.phibar)
    gnorm = np.linalg.norm(grads, axis=2)
    w = problem.quad_w[None, :]
    coef_val = smoothed_delta_prime(vals, problem.eps) * gnorm * w
    safe = np.maximum(gnorm, _GRAD_FLOOR)
    coef_grad = (smoothed_delta(vals, problem.eps) * w / safe)[:, :, None] * grads
    contrib = np.einsum("eg,ga->ea", coef_val, problem.shape_vals) \
        + np.einsum("egd,gda->ea", coef_grad, problem.shape_grads)
    return _through_filter(problem, _scatter_to_nodes(problem, contrib)) \
        / problem.perimeter


def grad_regularization(problem: MacroProblem, prep: PreparedDesign) -> np.ndarray:
    lo, hi = problem.trunc
    w = 1.0 / problem.perimeter
    vals_b, grads_b = problem.gauss_values(prep.phibar)
    vals_t, grads_t = problem.gauss_values(prep.phitilde)
    qw = problem.quad_w[None, :]
    coef_val = 2.0 * (vals_b - vals_t) * qw / ((hi - lo) ** 2 * problem.area)
    coef_grad = 2.0 * (grads_b - grads_t) * qw[:, :, None] / problem.area
    contrib = np.einsum("eg,ga->ea", coef_val, problem.shape_vals) \
        + np.einsum("egd,gda->ea", coef_grad, problem.shape_grads)
    return w * _through_filter(problem, _scatter_to_nodes(problem, contrib))


def layout_gradient(problem: MacroProblem, prep: PreparedDesign,
                    layout: np.ndarray, layout_id: int = -1,
                    design_grads: dict | None = None) -> GradientBundle:
    """Objective/constraint gradient bundle for one layout.

    ``design_grads`` may carry precomputed layout-independent pieces
    ('mass', 'perimeter', 'regularization') to avoid recomputation across
    the layouts of one iteration.
    """
    psi, u = problem.solve_layout(prep, layout)
    if design_grads is None:
        design_grads = {
            "mass": grad_mass(problem, prep),
            "perimeter": grad_perimeter(problem, prep),
            "regularization": grad_regularization(problem, prep),
        }
    w = problem.weights
    d_obj = w.w_psi / problem.psi0 * grad_strain_energy(problem, prep, layout, u)
    d_obj = d_obj + w.w_mass * design_grads["mass"] \
        + w.w_per * design_grads["perimeter"] \
        + w.w_reg * design_grads["regularization"]
    objective = problem.objective_value(psi, prep)
    constraint = prep.mass_ratio - problem.gamma_req
    return GradientBundle(
        objective=objective,
        strain_energy=psi,
        constraints=np.array([constraint]),
        d_objective=d_obj,
        d_constraints=design_grads["mass"][None, :].copy(),
        layout_id=layout_id)


def stochastic_gradient_bundle(problem: MacroProblem, theta: np.ndarray,
                               layouts) -> MeanBundle:
    """Average values and gradients over the layouts, in layout order."""
    layouts = list(layouts)
    if len(layouts) < 1:
        raise ValueError("need at least one layout")
    prep = problem.prepare(theta)
    design_grads = {
        "mass": grad_mass(problem, prep),
        "perimeter": grad_perimeter(problem, prep),
        "regularization": grad_regularization(problem, prep),
    }
    per_obj, per_con, per_psi = [], [], []
    sum_dobj = np.zeros(theta.size)
    sum_dcon = None
    for i, layout in enumerate(layouts):
        try:
            bundle = layout_gradient(problem, prep, layout, layout_id=i,
                                     design_grads=design_grads)
        except Exception as exc:
            raise RuntimeError(f"layout {i} failed: {exc}") from exc
        per_obj.append(bundle.objective)
        per_con.append(bundle.constraints)
        per_psi.append(bundle.strain_energy)
        sum_dobj += bundle.d_objective
        sum_dcon = bundle.d_constraints if sum_dcon is None \
            else sum_dcon + bundle.d_constraints
    n = float(len(layouts))
    per_obj = np.array(per_obj)
    per_con = np.stack(per_con)
    per_psi = np.array(per_psi)
    return MeanBundle(
        objective=float(np.sum(per_obj) / n),
        constraints=np.sum(per_con, axis=0) / n,
        d_objective=sum_dobj / n,
        d_constraints=sum_dcon / n,
        per_layout_objective=per_obj,
        per_layout_constraints=per_con,
        per_layout_energy=per_psi)


# ---------------------------------------------------------------------------
# finite-difference verification
# ---------------------------------------------------------------------------

def _functional_pair(problem: MacroProblem, name: str, theta: np.ndarray,
                     layout: np.ndarray | None):
    """(value function, analytic gradient) for one named functional."""
    if name == "compliance":
        if layout is None:
            raise ValueError("compliance check needs a layout")

        def value(th):
            prep = problem.prepare(th)
            return problem.solve_layout(prep, layout)[0]

        prep0 = problem.prepare(theta)
        _, u0 = problem.solve_layout(prep0, layout)
        grad = grad_strain_energy(problem, prep0, layout, u0)
        return value, grad
    if name == "mass":
        def value(th):
            return problem.prepare(th).mass_ratio
        return value, grad_mass(problem, problem.prepare(theta))
    if name == "perimeter":
        def value(th):
            return problem.perimeter_penalty(problem.filtered(th))
        return value, grad_perimeter(problem, problem.prepare(theta))
    if name == "regularization":
        # frozen target: perturbed evaluations keep the base design's
        # redistanced field
        prep0 = problem.prepare(theta)

        def value(th):
            return problem.regularization_penalty(problem.filtered(th),
                                                  prep0.phitilde)
        return value, grad_regularization(problem, prep0)
    raise ValueError(f"unknown functional {name!r}; "
                     f"choose from {sorted(FUNCTIONALS)}")


FUNCTIONALS = ("compliance", "mass", "perimeter", "regularization")


def fd_check(problem: MacroProblem, name: str, theta: np.ndarray,
             components, step: float | None = None,
             layout: np.ndarray | None = None):
    """Central-difference check of one functional's analytic gradient.

    Returns ``(max_rel_error, rows)`` with one row per component:
    (component, analytic, finite difference, relative error).  Relative
    errors use an absolute floor of 1e-12 against near-zero pairs.
    """
    if step is None:
        step = 1e-5 * problem.mesh.h
    if step <= 0.0:
        raise ValueError("step must be positive")
    value, grad = _functional_pair(problem, name, theta, layout)
    rows = []
    worst = 0.0
    for comp in components:
        plus = theta.copy()
        plus[comp] += step
        minus = theta.copy()
        minus[comp] -= step
        fd = (value(plus) - value(minus)) / (2.0 * step)
        analytic = grad[comp]
        rel = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-12)
        rows.append((int(comp), float(analytic), float(fd), float(rel)))
        worst = max(worst, rel)
    return worst, rows
