"""Closed-form Eshelby tensor for spheres and prolate spheroids.

The inclusion is a spheroid with its symmetry axis along local axis 1 and
aspect ratio alpha = length/diameter >= 1 embedded in an isotropic matrix
with Poisson ratio nu.  Components follow the classical closed forms for
the interior field of an ellipsoidal inclusion; the sphere (alpha = 1)
uses the exact spherical expressions.  Only minor symmetries hold: the
tensor maps a (symmetric) eigenstrain to the constrained strain and is not
major-symmetric in general.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elastic import strain_map_tensor_to_voigt

__all__ = ["EshelbyTensor", "eshelby_spheroid"]

# below this the prolate expressions are dominated by cancellation in g
# (terms ~1/(alpha^2-1) cancel to O(1)); fall back to the exact sphere,
# which differs from the true spheroid by < 4e-5 at the switch point
_SPHERE_SWITCH = 1.0 + 1e-4


@dataclass(frozen=True)
class EshelbyTensor:
    """Interior Eshelby tensor of a spheroidal inclusion.

    ``components`` is the full 3x3x3x3 tensor; ``voigt`` gives the 6x6
    strain-to-strain matrix in the engineering-shear convention.
    """

    components: np.ndarray
    aspect_ratio: float
    nu_matrix: float

    @property
    def voigt(self) -> np.ndarray:
        return strain_map_tensor_to_voigt(self.components)


def _sphere_components(nu: float) -> np.ndarray:
    s = np.zeros((3, 3, 3, 3))
    diag = (7.0 - 5.0 * nu) / (15.0 * (1.0 - nu))
    off = (5.0 * nu - 1.0) / (15.0 * (1.0 - nu))
    shear = (4.0 - 5.0 * nu) / (15.0 * (1.0 - nu))
    for i in range(3):
        for j in range(3):
            s[i, i, j, j] = diag if i == j else off
    for i in range(3):
        for j in range(3):
            if i != j:
                s[i, j, i, j] = s[i, j, j, i] = shear
                s[j, i, i, j] = s[j, i, j, i] = shear
    return s


def _prolate_components(alpha: float, nu: float) -> np.ndarray:
    a2 = alpha * alpha
    q = a2 - 1.0
    # g = alpha/(alpha^2-1)^(3/2) * [alpha*sqrt(alpha^2-1) - arccosh(alpha)]
    g = alpha / q**1.5 * (alpha * np.sqrt(q) - np.arccosh(alpha))
    f = 1.0 / (1.0 - nu)

    s1111 = 0.5 * f * (1.0 - 2.0 * nu + (3.0 * a2 - 1.0) / q
                       - (1.0 - 2.0 * nu + 3.0 * a2 / q) * g)
    s2222 = 0.375 * f * a2 / q \
        + 0.25 * f * (1.0 - 2.0 * nu - 2.25 / q) * g
    s2233 = 0.25 * f * (0.5 * a2 / q - (1.0 - 2.0 * nu + 0.75 / q) * g)
    s2211 = -0.5 * f * a2 / q \
        + 0.25 * f * (3.0 * a2 / q - (1.0 - 2.0 * nu)) * g
    s1122 = -0.5 * f * (1.0 - 2.0 * nu + 1.0 / q) \
        + 0.5 * f * (1.0 - 2.0 * nu + 1.5 / q) * g
    s2323 = 0.25 * f * (0.5 * a2 / q + (1.0 - 2.0 * nu - 0.75 / q) * g)
    s1212 = 0.25 * f * (1.0 - 2.0 * nu - (a2 + 1.0) / q
                        - 0.5 * (1.0 - 2.0 * nu - 3.0 * (a2 + 1.0) / q) * g)

    s = np.zeros((3, 3, 3, 3))
    s[0, 0, 0, 0] = s1111
    s[1, 1, 1, 1] = s[2, 2, 2, 2] = s2222
    s[1, 1, 2, 2] = s[2, 2, 1, 1] = s2233
    s[1, 1, 0, 0] = s[2, 2, 0, 0] = s2211
    s[0, 0, 1, 1] = s[0, 0, 2, 2] = s1122
    for (i, j), v in (((1, 2), s2323), ((0, 1), s1212), ((0, 2), s1212)):
        s[i, j, i, j] = s[i, j, j, i] = v
        s[j, i, i, j] = s[j, i, j, i] = v
    return s


def eshelby_spheroid(aspect_ratio: float, nu_matrix: float) -> EshelbyTensor:
    """Eshelby tensor for a prolate spheroid aligned with local axis 1."""
    if aspect_ratio < 1.0:
        raise ValueError("aspect ratio must be >= 1")
    if not -1.0 < nu_matrix < 0.5:
        raise ValueError("matrix Poisson ratio must lie in (-1, 0.5)")
    if aspect_ratio < _SPHERE_SWITCH:
        comp = _sphere_components(nu_matrix)
    else:
        comp = _prolate_components(aspect_ratio, nu_matrix)
    return EshelbyTensor(components=comp, aspect_ratio=aspect_ratio,
                         nu_matrix=nu_matrix)
