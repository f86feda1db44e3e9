"""Method of moving asymptotes driven by (possibly stochastic) gradients.

Each step builds the separable rational approximation of the objective and
constraints around the current iterate,

    f(x) ~ r + sum_j [ p_j/(U_j - x_j) + q_j/(x_j - L_j) ],

with moving asymptotes L, U initialized at 0.5 of the box range and then
expanded (x1.2) or shrunk (x0.7) depending on whether successive moves
oscillate.  The convex subproblem is solved by a primal-dual interior
Newton method on the standard elastic relaxation (slack variables y >= 0
priced by a large linear cost), so it is always feasible: when the
approximate constraints cannot be met, the minimizer of the weighted
violation is returned, which doubles as the feasibility-restoration step.
No inner (conservative re-approximation) iterations are performed.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = ["GcmmaState", "gcmma_step"]

_ASY_INIT = 0.5
_ASY_INCR = 1.2
_ASY_DECR = 0.7
_ALBEFA = 0.1
_RAA0 = 1e-5
_EPSI_MIN = 1e-9
_ELASTIC_COST = 1000.0


@dataclass(frozen=True)
class GcmmaState:
    """Asymptotes, previous iterates, and knobs of the MMA update."""

    lower_asymptote: np.ndarray
    upper_asymptote: np.ndarray
    x_prev1: np.ndarray
    x_prev2: np.ndarray
    iteration: int
    lower: np.ndarray
    upper: np.ndarray
    move_limit: float = 0.1
    kkt_residual: float = np.inf
    elastic_violation: float = 0.0

    @classmethod
    def fresh(cls, lower, upper, n: int, move_limit: float = 0.1) -> "GcmmaState":
        lo = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()
        if np.any(lo >= hi):
            raise ValueError("finite box bounds with lower < upper required")
        return cls(lower_asymptote=lo.copy(), upper_asymptote=hi.copy(),
                   x_prev1=np.zeros(n), x_prev2=np.zeros(n), iteration=0,
                   lower=lo, upper=hi, move_limit=move_limit)


def _update_asymptotes(state: GcmmaState, x: np.ndarray):
    rng = state.upper - state.lower
    k = state.iteration + 1
    if k <= 2:
        low = x - _ASY_INIT * rng
        upp = x + _ASY_INIT * rng
    else:
        osc = (x - state.x_prev1) * (state.x_prev1 - state.x_prev2)
        factor = np.ones_like(x)
        factor[osc > 0.0] = _ASY_INCR
        factor[osc < 0.0] = _ASY_DECR
        low = x - factor * (state.x_prev1 - state.lower_asymptote)
        upp = x + factor * (state.upper_asymptote - state.x_prev1)
        low = np.clip(low, x - 10.0 * rng, x - 0.01 * rng)
        upp = np.clip(upp, x + 0.01 * rng, x + 10.0 * rng)
    return low, upp


def gcmma_step(state: GcmmaState, theta: np.ndarray, f0: float,
               df0: np.ndarray, g: np.ndarray, dg: np.ndarray
               ) -> tuple[np.ndarray, GcmmaState]:
    """One outer iteration: approximate, solve the subproblem, move.

    ``g``/``dg`` are the constraint values and their (m, n) gradients at
    ``theta``; ``f0`` is unused by the update (the approximation is built
    from gradients) but kept for a uniform optimizer interface.
    """
    del f0
    x = np.asarray(theta, dtype=float)
    n = x.size
    g = np.atleast_1d(np.asarray(g, dtype=float))
    dg = np.atleast_2d(np.asarray(dg, dtype=float))
    m = g.size
    if dg.shape != (m, n):
        raise ValueError(f"constraint gradients must be ({m}, {n})")

    low, upp = _update_asymptotes(state, x)
    rng = state.upper - state.lower

    alfa = np.maximum.reduce([low + _ALBEFA * (x - low),
                              x - state.move_limit * rng, state.lower])
    beta = np.minimum.reduce([upp - _ALBEFA * (upp - x),
                              x + state.move_limit * rng, state.upper])

    ux = upp - x
    xl = x - low
    xmami_inv = 1.0 / np.maximum(rng, 1e-5)

    def split(grad):
        pos = np.maximum(grad, 0.0)
        neg = np.maximum(-grad, 0.0)
        reg = 0.001 * (pos + neg) + _RAA0 * xmami_inv
        return (pos + reg) * ux**2, (neg + reg) * xl**2

    p0, q0 = split(df0)
    p = np.empty((m, n))
    q = np.empty((m, n))
    for j in range(m):
        p[j], q[j] = split(dg[j])
    b = p @ (1.0 / ux) + q @ (1.0 / xl) - g

    x_new, y_new, kkt = _solve_subproblem(low, upp, alfa, beta, p0, q0, p, q, b)
    return x_new, replace(
        state,
        lower_asymptote=low, upper_asymptote=upp,
        x_prev2=state.x_prev1 if state.iteration >= 1 else x,
        x_prev1=x,
        iteration=state.iteration + 1,
        kkt_residual=kkt,
        elastic_violation=float(np.max(y_new)) if m else 0.0)


def _solve_subproblem(low, upp, alfa, beta, p0, q0, p, q, b):
    """Primal-dual interior Newton solve of the elastic MMA subproblem.

    Minimizes sum[p0/(U-x) + q0/(x-L)] + c^T y + 0.5 y^T y subject to the
    approximate constraints relaxed by y >= 0, driving the barrier to
    1e-9 so the KKT residual ends below 1e-8.
    """
    n = low.size
    m = b.size
    c = np.full(m, _ELASTIC_COST)
    d = np.ones(m)
    a0, a = 1.0, np.zeros(m)

    x = 0.5 * (alfa + beta)
    y = np.ones(m)
    z = 1.0
    lam = np.ones(m)
    xsi = np.maximum(1.0 / np.maximum(x - alfa, 1e-12), 1.0)
    eta = np.maximum(1.0 / np.maximum(beta - x, 1e-12), 1.0)
    mu = np.maximum(1.0, 0.5 * c)
    zet = 1.0
    s = np.ones(m)

    def residuals(x, y, z, lam, xsi, eta, mu, zet, s, epsi):
        ux, xl = upp - x, x - low
        plam = p0 + lam @ p
        qlam = q0 + lam @ q
        gvec = p @ (1.0 / ux) + q @ (1.0 / xl)
        rex = plam / ux**2 - qlam / xl**2 - xsi + eta
        rey = c + d * y - mu - lam
        rez = a0 - zet - a @ lam
        relam = gvec - a * z - y + s - b
        rexsi = xsi * (x - alfa) - epsi
        reeta = eta * (beta - x) - epsi
        remu = mu * y - epsi
        rezet = zet * z - epsi
        res = lam * s - epsi
        full = np.concatenate([rex, rey, [rez], relam, rexsi, reeta, remu,
                               [rezet], res])
        return full

    epsi = 1.0
    while epsi > _EPSI_MIN:
        residu = residuals(x, y, z, lam, xsi, eta, mu, zet, s, epsi)
        residu_norm = np.linalg.norm(residu)
        residu_max = np.max(np.abs(residu))
        for _ in range(200):
            if residu_max <= 0.9 * epsi:
                break
            ux, xl = upp - x, x - low
            plam = p0 + lam @ p
            qlam = q0 + lam @ q
            gvec = p @ (1.0 / ux) + q @ (1.0 / xl)
            gg = p / ux[None, :] ** 2 - q / xl[None, :] ** 2

            delx = plam / ux**2 - qlam / xl**2 - epsi / (x - alfa) \
                + epsi / (beta - x)
            dely = c + d * y - lam - epsi / y
            delz = a0 - a @ lam - epsi / z
            dellam = gvec - a * z - y - b + epsi / lam

            diagx = 2.0 * (plam / ux**3 + qlam / xl**3) \
                + xsi / (x - alfa) + eta / (beta - x)
            diagy = d + mu / y
            diaglam = s / lam + 1.0 / diagy

            # condense on (lam, z): m is small in this application
            blam = dellam + dely / diagy - gg @ (delx / diagx)
            aa = np.diag(diaglam) + (gg / diagx[None, :]) @ gg.T
            aa = np.block([[aa, a[:, None]],
                           [a[None, :], -np.array([[zet / z]])]])
            rhs = np.concatenate([blam, [delz]])
            sol = np.linalg.solve(aa, rhs)
            dlam = sol[:m]
            dz = sol[m]
            dx = -delx / diagx - (dlam @ gg) / diagx
            dy = -dely / diagy + dlam / diagy
            dxsi = -xsi + epsi / (x - alfa) - xsi * dx / (x - alfa)
            deta = -eta + epsi / (beta - x) + eta * dx / (beta - x)
            dmu = -mu + epsi / y - mu * dy / y
            dzet = -zet + epsi / z - zet * dz / z
            ds = -s + epsi / lam - s * dlam / lam

            # fraction-to-boundary step limit
            xx = np.concatenate([y, [z], lam, xsi, eta, mu, [zet], s])
            dxx = np.concatenate([dy, [dz], dlam, dxsi, deta, dmu, [dzet], ds])
            step_all = np.max(-1.01 * dxx / xx)
            step_alfa = np.max(-1.01 * dx / (x - alfa))
            step_beta = np.max(1.01 * dx / (beta - x))
            steg = 1.0 / max(step_all, step_alfa, step_beta, 1.0)

            old = (x, y, z, lam, xsi, eta, mu, zet, s)
            new_norm = 2.0 * residu_norm
            for _ in range(50):
                if new_norm <= residu_norm:
                    break
                x = old[0] + steg * dx
                y = old[1] + steg * dy
                z = old[2] + steg * dz
                lam = old[3] + steg * dlam
                xsi = old[4] + steg * dxsi
                eta = old[5] + steg * deta
                mu = old[6] + steg * dmu
                zet = old[7] + steg * dzet
                s = old[8] + steg * ds
                residu = residuals(x, y, z, lam, xsi, eta, mu, zet, s, epsi)
                new_norm = np.linalg.norm(residu)
                steg *= 0.5
            residu_norm = new_norm
            residu_max = np.max(np.abs(residu))
        epsi *= 0.1
    return x, y, residu_max
