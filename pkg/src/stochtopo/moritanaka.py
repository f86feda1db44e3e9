"""Mean-field homogenization of chopped-fiber composites.

The effective stiffness of a matrix with aligned spheroidal fibers is the
Mori-Tanaka estimate

    C_hom = C_m + v_f (C_f - C_m) : A : [ (1 - v_f) I + v_f A ]^(-1),

where A = [ I + S : C_m^(-1) : (C_f - C_m) ]^(-1) is the dilute strain
concentration tensor built from the Eshelby tensor S of the fiber shape.
This phase ordering recovers the matrix at v_f -> 0 and the fiber at
v_f -> 1.  The estimate is formed in the fiber's local frame (axis 1 along
the fiber) and rotated into the global frame by the in-plane/out-of-plane
angles of the realization.
"""
from __future__ import annotations

import numpy as np

from .elastic import ConstitutiveTensor, IsotropicPhase, isotropic_tensor, rotate_tensor
from .eshelby import eshelby_spheroid
from .randfield import FiberRealization

__all__ = ["mori_tanaka", "mori_tanaka_local"]


def _concentration(c_m: np.ndarray, c_f: np.ndarray, s_voigt: np.ndarray) -> np.ndarray:
    delta = c_f - c_m
    a_inv = np.eye(6) + s_voigt @ np.linalg.solve(c_m, delta)
    try:
        return np.linalg.inv(a_inv)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "singular strain concentration tensor; phase moduli are "
            "pathological") from exc


def mori_tanaka_local(fiber: FiberRealization) -> ConstitutiveTensor:
    """Effective stiffness in the fiber frame (axis 1 along the fiber)."""
    c_m = isotropic_tensor(IsotropicPhase(fiber.e_matrix, fiber.nu_matrix), 3).voigt
    c_f = isotropic_tensor(IsotropicPhase(fiber.e_fiber, fiber.nu_fiber), 3).voigt
    s = eshelby_spheroid(fiber.aspect_ratio, fiber.nu_matrix).voigt
    a = _concentration(c_m, c_f, s)
    vf = fiber.volume_fraction
    correction = vf * (c_f - c_m) @ a @ np.linalg.inv(
        (1.0 - vf) * np.eye(6) + vf * a)
    c_hom = c_m + correction
    c_hom = 0.5 * (c_hom + c_hom.T)
    return ConstitutiveTensor(dim=3, voigt=c_hom)


def mori_tanaka(fiber: FiberRealization) -> ConstitutiveTensor:
    """Effective global-frame stiffness for one fiber realization."""
    local = mori_tanaka_local(fiber)
    return rotate_tensor(local, fiber.angle_inplane, fiber.angle_outplane)
