"""Stochastic-gradient design updates: penalty direction, SGD, Adam.

Inequality constraints enter the descent direction through the squared
violation penalty E[(g+)^2], whose gradient contributes 2 kappa g+ grad(g)
per constraint.  The update rules keep the iterate inside the design box
by clamping after every step.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["PenaltySpec", "penalty_descent_direction", "sgd_step",
           "AdamState", "adam_step", "adam_step_bound"]


@dataclass(frozen=True)
class PenaltySpec:
    """Nonnegative penalty factor per inequality constraint."""

    kappa: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.kappa) < 0.0):
            raise ValueError("penalty factors must be >= 0")


def penalty_descent_direction(grad_objective: np.ndarray,
                              constraints: np.ndarray,
                              constraint_grads: np.ndarray,
                              penalties: PenaltySpec) -> np.ndarray:
    """Search direction of the penalized objective.

    h = grad(R) + sum_j kappa_j * 2 * max(g_j, 0) * grad(g_j), from
    differentiating the squared-violation penalty.
    """
    constraints = np.atleast_1d(np.asarray(constraints, dtype=float))
    grads = np.atleast_2d(constraint_grads)
    kappa = np.atleast_1d(np.asarray(penalties.kappa, dtype=float))
    if not (len(constraints) == grads.shape[0] == len(kappa)):
        raise ValueError("constraint values, gradients, and penalties must "
                         "have matching counts")
    h = grad_objective.copy()
    violation = np.maximum(constraints, 0.0)
    for j in range(len(constraints)):
        h += kappa[j] * 2.0 * violation[j] * grads[j]
    return h


def sgd_step(eta: float, theta: np.ndarray, direction: np.ndarray,
             bounds: tuple[float, float]) -> np.ndarray:
    """One projected gradient step theta - eta * h, clamped to the box."""
    if eta <= 0.0:
        raise ValueError("step size must be positive")
    return np.clip(theta - eta * direction, bounds[0], bounds[1])


@dataclass(frozen=True)
class AdamState:
    """Moment accumulators and hyperparameters of the Adam update."""

    m: np.ndarray
    v: np.ndarray
    k: int = 0
    beta_m: float = 0.9
    beta_v: float = 0.999
    epsilon: float = 1e-8
    eta: float = 0.05

    @classmethod
    def fresh(cls, n: int, eta: float = 0.05, beta_m: float = 0.9,
              beta_v: float = 0.999, epsilon: float = 1e-8) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n), k=0, beta_m=beta_m,
                   beta_v=beta_v, epsilon=epsilon, eta=eta)

    def __post_init__(self):
        if not (0.0 <= self.beta_m < 1.0 and 0.0 <= self.beta_v < 1.0):
            raise ValueError("decay rates must lie in [0, 1)")
        if self.k < 0:
            raise ValueError("iteration counter must be >= 0")
        if np.any(self.v < 0.0):
            raise ValueError("second moments must be >= 0")


def adam_step_bound(state: AdamState, k: int) -> float:
    """Provable per-component step bound (in units of eta) at iteration k.

    Cauchy-Schwarz on the exponential moment weights gives
    |m_hat| <= B_k sqrt(v_hat), so the update magnitude never exceeds
    eta * B_k.  B_1 = 1 exactly; for the default decay rates B_k grows to
    about 7.3, and gradient histories that are quiet and then spike really
    do exceed eta, so this is the bound that can be asserted.
    """
    bm, bv = state.beta_m, state.beta_v
    r = bm * bm / bv
    num = (1.0 - bm) ** 2 * (1.0 - bv**k) * (1.0 - r**k)
    den = (1.0 - bm**k) ** 2 * (1.0 - bv) * (1.0 - r)
    return float(np.sqrt(num / den))


def adam_step(state: AdamState, theta: np.ndarray, direction: np.ndarray,
              bounds: tuple[float, float]) -> tuple[np.ndarray, AdamState]:
    """One Adam update with bias correction, clamped to the design box.

    m <- beta_m m + (1-beta_m) h;  v <- beta_v v + (1-beta_v) h^2;
    hat m = m/(1-beta_m^k);  hat v = v/(1-beta_v^k);
    theta <- theta - eta hat m / (sqrt(hat v) + epsilon).
    """
    if direction.shape != theta.shape or state.m.shape != theta.shape:
        raise ValueError("direction/state sizes must match theta")
    k = state.k + 1
    m = state.beta_m * state.m + (1.0 - state.beta_m) * direction
    v = state.beta_v * state.v + (1.0 - state.beta_v) * direction**2
    m_hat = m / (1.0 - state.beta_m**k)
    v_hat = v / (1.0 - state.beta_v**k)
    delta = state.eta * m_hat / (np.sqrt(v_hat) + state.epsilon)
    limit = state.eta * adam_step_bound(state, k) * (1.0 + 1e-9) + 1e-300
    assert np.max(np.abs(delta)) <= limit, \
        "Adam step exceeded its provable magnitude bound"
    theta_new = np.clip(theta - delta, bounds[0], bounds[1])
    return theta_new, replace(state, m=m, v=v, k=k)
