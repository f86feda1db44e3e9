"""Constitutive tensors in Voigt notation, rotations, plane reductions.

Voigt ordering: (11, 22, 12) in 2D and (11, 22, 33, 23, 13, 12) in 3D.
Strains use the engineering-shear convention (gamma = 2*eps), so a Voigt
stiffness maps engineering strain to stress and strain energy density is
(1/2) * eps_V . C . eps_V.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "IsotropicPhase",
    "ConstitutiveTensor",
    "isotropic_tensor",
    "rotate_tensor",
    "reduce_to_plane",
    "stiffness_voigt_to_tensor",
    "stiffness_tensor_to_voigt",
    "strain_map_tensor_to_voigt",
]

PLANE_STRESS = "plane_stress"
PLANE_STRAIN = "plane_strain"
THREE_D = "3D"

# tensor index pairs behind each Voigt slot, 3D ordering
_VOIGT_PAIRS = ((0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1))


@dataclass(frozen=True)
class IsotropicPhase:
    """Linear elastic isotropic phase (Young's modulus, Poisson ratio)."""

    e: float
    nu: float

    def __post_init__(self):
        if self.e <= 0.0:
            raise ValueError("Young's modulus must be positive")
        if not -1.0 < self.nu < 0.5:
            raise ValueError("Poisson ratio must lie in (-1, 0.5)")

    @property
    def lame(self) -> tuple[float, float]:
        lam = self.e * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
        mu = self.e / (2.0 * (1.0 + self.nu))
        return lam, mu


@dataclass(frozen=True)
class ConstitutiveTensor:
    """Symmetric Voigt stiffness matrix, 3x3 in 2D and 6x6 in 3D."""

    dim: int
    voigt: np.ndarray

    def __post_init__(self):
        expected = 3 if self.dim == 2 else 6
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.voigt.shape != (expected, expected):
            raise ValueError(
                f"voigt matrix must be {expected}x{expected} for dim {self.dim}")

    def is_symmetric(self, rtol: float = 1e-10) -> bool:
        scale = np.max(np.abs(self.voigt))
        return bool(np.max(np.abs(self.voigt - self.voigt.T)) <= rtol * scale)

    def is_positive_definite(self) -> bool:
        sym = 0.5 * (self.voigt + self.voigt.T)
        return bool(np.all(np.linalg.eigvalsh(sym) > 0.0))


def isotropic_tensor(phase: IsotropicPhase, dim: int,
                     hypothesis: str = THREE_D) -> ConstitutiveTensor:
    """Standard isotropic Voigt stiffness for the given kinematic hypothesis."""
    e, nu = phase.e, phase.nu
    if dim == 3:
        if hypothesis != THREE_D:
            raise ValueError("3D tensors take hypothesis '3D'")
        lam, mu = phase.lame
        c = np.zeros((6, 6))
        c[:3, :3] = lam
        c[np.diag_indices(3)] += 2.0 * mu
        c[3, 3] = c[4, 4] = c[5, 5] = mu
        return ConstitutiveTensor(dim=3, voigt=c)
    if dim != 2:
        raise ValueError("dim must be 2 or 3")
    if hypothesis == PLANE_STRESS:
        f = e / (1.0 - nu * nu)
        c = f * np.array([[1.0, nu, 0.0],
                          [nu, 1.0, 0.0],
                          [0.0, 0.0, 0.5 * (1.0 - nu)]])
    elif hypothesis == PLANE_STRAIN:
        f = e / ((1.0 + nu) * (1.0 - 2.0 * nu))
        c = f * np.array([[1.0 - nu, nu, 0.0],
                          [nu, 1.0 - nu, 0.0],
                          [0.0, 0.0, 0.5 * (1.0 - 2.0 * nu)]])
    else:
        raise ValueError(f"unknown hypothesis {hypothesis!r} for dim 2")
    return ConstitutiveTensor(dim=2, voigt=c)


# ---------------------------------------------------------------------------
# Voigt <-> full tensor conversions
# ---------------------------------------------------------------------------

def stiffness_voigt_to_tensor(c_voigt: np.ndarray) -> np.ndarray:
    """Expand a 6x6 Voigt stiffness into the full 3x3x3x3 tensor."""
    t = np.zeros((3, 3, 3, 3))
    for p, (i, j) in enumerate(_VOIGT_PAIRS):
        for q, (k, l) in enumerate(_VOIGT_PAIRS):
            v = c_voigt[p, q]
            t[i, j, k, l] = v
            t[j, i, k, l] = v
            t[i, j, l, k] = v
            t[j, i, l, k] = v
    return t


def stiffness_tensor_to_voigt(t: np.ndarray) -> np.ndarray:
    """Contract a stiffness tensor with minor symmetries to 6x6 Voigt."""
    c = np.empty((6, 6))
    for p, (i, j) in enumerate(_VOIGT_PAIRS):
        for q, (k, l) in enumerate(_VOIGT_PAIRS):
            c[p, q] = t[i, j, k, l]
    return c


def strain_map_tensor_to_voigt(t: np.ndarray) -> np.ndarray:
    """Voigt matrix of a strain-to-strain map (e.g. Eshelby's tensor).

    With engineering shear on both sides, shear-output rows pick up a
    factor two while the doubled shear input is already carried by gamma.
    """
    m = np.empty((6, 6))
    for p, (i, j) in enumerate(_VOIGT_PAIRS):
        w = 1.0 if p < 3 else 2.0
        for q, (k, l) in enumerate(_VOIGT_PAIRS):
            m[p, q] = w * t[i, j, k, l]
    return m


# ---------------------------------------------------------------------------
# rotation and plane reduction
# ---------------------------------------------------------------------------

def rotation_from_angles(angle_inplane: float, angle_outplane: float) -> np.ndarray:
    """Rotation taking local axis 1 to the global fiber direction.

    ``angle_inplane`` is the azimuth from the global x axis in the x-y
    plane; ``angle_outplane`` elevates out of that plane, so both angles
    zero give the identity.
    """
    ci, si = np.cos(angle_inplane), np.sin(angle_inplane)
    co, so = np.cos(angle_outplane), np.sin(angle_outplane)
    rz = np.array([[ci, -si, 0.0], [si, ci, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[co, 0.0, -so], [0.0, 1.0, 0.0], [so, 0.0, co]])
    return rz @ ry


def rotate_tensor(c: ConstitutiveTensor, angle_inplane: float,
                  angle_outplane: float) -> ConstitutiveTensor:
    """Rotate a 3D stiffness from its local frame into the global frame."""
    if c.dim != 3:
        raise ValueError("rotate_tensor expects a 3D tensor")
    r = rotation_from_angles(angle_inplane, angle_outplane)
    t = stiffness_voigt_to_tensor(c.voigt)
    t_rot = np.einsum("pi,qj,rk,sl,ijkl->pqrs", r, r, r, r, t, optimize=True)
    return ConstitutiveTensor(dim=3, voigt=stiffness_tensor_to_voigt(t_rot))


def reduce_to_plane(c: ConstitutiveTensor, hypothesis: str) -> ConstitutiveTensor:
    """Reduce a 3D stiffness to 2D Voigt under plane strain or plane stress.

    Plane strain keeps the (11, 22, 12) rows and columns; plane stress
    statically condenses the out-of-plane components (Schur complement),
    which preserves positive definiteness.
    """
    if c.dim != 3:
        raise ValueError("reduce_to_plane expects a 3D tensor")
    keep = [0, 1, 5]
    if hypothesis == PLANE_STRAIN:
        c2 = c.voigt[np.ix_(keep, keep)].copy()
    elif hypothesis == PLANE_STRESS:
        drop = [2, 3, 4]
        ckk = c.voigt[np.ix_(keep, keep)]
        ckd = c.voigt[np.ix_(keep, drop)]
        cdk = c.voigt[np.ix_(drop, keep)]
        cdd = c.voigt[np.ix_(drop, drop)]
        c2 = ckk - ckd @ np.linalg.solve(cdd, cdk)
    else:
        raise ValueError(f"unknown plane hypothesis {hypothesis!r}")
    return ConstitutiveTensor(dim=2, voigt=c2)
