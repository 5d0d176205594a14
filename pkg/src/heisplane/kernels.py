"""Closed-form parametrix, its frame derivatives, f_z and the kernels K_i.

Axis formulas take ``z = (z1, 0, 0, 0)``; general poles are reduced to the
axis with :func:`canonicalize`, which uses the distance-preserving
permutation of the frame matrix (see :func:`plane_geom.isometry_matrix`).

Two normalizations are exposed:

* :data:`C_HR` is the closed value ``42 pi B(5/4, 3/2)`` of
  ``21 * integral of (x1^2+x2^2+x4^2)`` over ``(x1^2+x2^2+x4^2)^2 + x3^2 <= 1``.
* :data:`C_GAMMA` ``= C_HR / 2`` is the constant that makes ``Gamma``
  reproduce point values: the volume form of ``{d <= 1}`` written with
  ``r^4 + 4 x3^2 <= 1`` halves the region used by ``C_HR``.

Every function taking ``C`` defaults to :data:`C_GAMMA`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DegeneratePoint, PoleHit
from .plane_geom import as_points, isometry_matrix, plane_dist4

C_HR = 42.0 * math.pi * math.gamma(1.25) * math.gamma(1.5) / math.gamma(2.75)
C_GAMMA = C_HR / 2.0

_COLS = {"gamma": 0, "z1": 1, "z2": 2, "z3": 3, "z4": 4, "f": 5, "k1": 6, "k2": 7, "k3": 8}


@dataclass(frozen=True)
class CanonicalPair:
    """A pole moved to ``(z1, 0, 0, 0)`` by the orthogonal map ``rotation``.

    ``rotation @ (z1, 0, 0, 0) == z`` and ``y_rot = rotation.T @ y``.
    """

    rotation: np.ndarray
    z1: float
    y_rot: np.ndarray | None = None

    def to_axis(self, y) -> np.ndarray:
        return as_points(y) @ self.rotation

    def from_axis(self, y) -> np.ndarray:
        return as_points(y) @ self.rotation.T


def canonicalize(z, y=None) -> CanonicalPair:
    z = as_points(z)
    r = float(np.linalg.norm(z))
    if r == 0.0:
        raise DegeneratePoint("the characteristic point has no canonical frame")
    R = isometry_matrix(z / r)
    y_rot = None if y is None else as_points(y) @ R
    return CanonicalPair(R, r, y_rot)


def _axis_or_canonical(y, z):
    """Return points in axis coordinates and the scalar ``z1``."""
    y = np.atleast_2d(as_points(y))
    z = as_points(z)
    if z.ndim != 1:
        raise ValueError("a single pole is expected")
    if not np.any(z[1:]) and z[0] >= 0:
        return y, float(z[0])
    if not np.any(z):
        return y, 0.0
    cp = canonicalize(z)
    return cp.to_axis(y), cp.z1


def _check(y, z, need_nonzero_y=True):
    y = np.atleast_2d(as_points(y))
    if need_nonzero_y and np.any(np.all(y == 0, axis=-1)):
        raise DegeneratePoint("kernel evaluated at the characteristic point")
    if np.any(np.all(y == as_points(z), axis=-1)):
        raise PoleHit("kernel evaluated on the diagonal y = z")


def _squeeze(out, y):
    return out[0] if np.ndim(as_points(y)) == 1 else out


def kernel_table(y, z, C: float = C_GAMMA) -> np.ndarray:
    """All closed-form kernels at ``(y, z)`` as an ``(n, 9)`` array."""
    _check(y, z)
    Y, z1 = _axis_or_canonical(y, z)
    return _backend.axis_kernels(np.ascontiguousarray(Y), z1, C)


def gamma(y, z, C: float = C_GAMMA):
    """``d(y, z)^-3 / C``."""
    _check(y, z, need_nonzero_y=False)
    return _squeeze(plane_dist4(np.atleast_2d(as_points(y)), as_points(z)) ** -0.75 / C, y)


def grad_d4(y, z1: float) -> np.ndarray:
    """``(T_1 d^4, T_2 d^4, T_3 d^4, T_{4,y-z} d^4)`` for ``z = (z1, 0, 0, 0)``."""
    y = as_points(y)
    y1, y2, y3, y4 = np.moveaxis(y, -1, 0)
    D1 = y1 - z1
    n2 = D1**2 + y2**2 + y3**2 + y4**2
    s = y3**2 * z1**2
    return np.stack([
        4 * n2**2 + 4 * n2 * z1 * D1 + 8 * s,
        4 * n2 * z1 * y4 - 8 * y2 * y3 * z1**2,
        4 * n2 * z1 * y2 + 8 * y4 * y3 * z1**2,
        8 * D1 * y3 * z1**2,
    ], axis=-1)


def grad_gamma(y, z, C: float = C_GAMMA) -> np.ndarray:
    """``(Z_1 Gamma, Z_2 Gamma, Z_3 Gamma, Z_{4,y-z} Gamma)``.

    ``z`` may be a scalar ``z1`` (pole on the axis) or a point; general poles
    return the derivatives of the canonical pair.
    """
    zp = np.array([float(z), 0, 0, 0]) if np.ndim(z) == 0 else as_points(z)
    return _squeeze(kernel_table(y, zp, C)[:, 1:5], y)


def r_terms(y, z1: float, convention: str = "derived") -> dict:
    """The R_{ij} decomposition pieces for ``z = (z1, 0, 0, 0)``.

    ``convention='printed'`` returns the R33 variant with coefficients
    ``4, 8, -8``; the default returns the one consistent with the
    divergence-form Laplacian (``12, 24, +8``).
    """
    y = as_points(y)
    y1, y2, y3, y4 = np.moveaxis(y, -1, 0)
    D1 = y1 - z1
    n2 = D1**2 + y2**2 + y3**2 + y4**2
    ny2 = y1**2 + y2**2 + y3**2 + y4**2
    d4 = n2**2 + 4 * y3**2 * z1**2
    s = y3**2 * z1**2
    if np.any(ny2 == 0):
        raise DegeneratePoint("R33 is undefined at the origin")
    if convention == "derived":
        R33 = 12 * n2 * z1 * D1 + 24 * s + 8 * z1 * s * D1 / ny2
    elif convention == "printed":
        R33 = 4 * n2 * z1 * D1 + 8 * s - 8 * z1 * s * D1 / ny2
    else:
        raise ValueError("convention must be 'derived' or 'printed'")
    return {
        "R11": 16 * d4 * z1**2 * (D1**2 + y4**2 + y2**2),
        "R12": 4 * (n2**2 + d4) ** 2,
        "R13": 16 * (n2**2 + d4) * n2 * z1 * D1,
        "R21": 28 * z1**2 * (y2**2 + y4**2 + D1**2),
        "R22": 16 * n2**2,
        "R23": 4 * s + 36 * n2 * z1 * D1,
        "R32": 12 * n2**2,
        "R33": R33,
    }


def f_z(y, z, C: float = C_GAMMA, convention: str = "derived"):
    """Defect ``f_z = Delta_z Gamma(., z)`` off the pole.

    The ``printed`` convention evaluates the same closed form with the
    printed R33; it is kept to document the discrepancy.
    """
    _check(y, z)
    Y, z1 = _axis_or_canonical(y, z)
    if convention == "derived":
        return _squeeze(_backend.axis_kernels(np.ascontiguousarray(Y), z1, C)[:, 5], y)
    R = r_terms(Y, z1, convention)
    y3 = Y[:, 2]
    ny2 = np.sum(Y * Y, axis=1)
    d4 = plane_dist4(Y, np.array([z1, 0, 0, 0]))
    val = 0.75 * d4 ** (-11 / 4) / (C * ny2) * (
        -1.75 * R["R13"] + d4 * R["R23"] + d4 * R["R33"] - 112 * y3**4 * z1**4)
    return _squeeze(val, y)


def z4_second_derivatives(y, z1: float, C: float = C_GAMMA) -> np.ndarray:
    """Closed forms of ``(Z_2 Z_{4,y-z} Gamma, Z_3 Z_{4,y-z} Gamma)`` on the axis."""
    y = np.atleast_2d(as_points(y))
    y1, y2, y3, y4 = y.T
    D1 = y1 - z1
    ny2 = np.sum(y * y, axis=1)
    d4 = plane_dist4(y, np.array([z1, 0, 0, 0]))
    t = grad_d4(y, z1)
    dm7, dm11 = d4 ** -1.75, d4 ** -2.75
    pre = -6 * z1**2 / (C * ny2)
    z2f = pre * (-1.75 * dm11 * t[:, 1] * D1 * y3 - dm7 * y4 * y3 - dm7 * D1 * y2)
    z3f = pre * (-1.75 * dm11 * t[:, 2] * D1 * y3 - dm7 * y2 * y3 + dm7 * D1 * y4)
    return np.stack([z2f, z3f], axis=-1)


def kernels_K(y, z, C: float = C_GAMMA, convention: str = "derived"):
    """Representation kernels ``(K_0, K_1, K_2, K_3)``.

    ``derived`` kernels make ``u(z) = sum_i int (Z_i Gamma + K_i) Z_i u |y| dy
    - int f_z u |y| dy`` exact, with ``K_0 = 0``.  ``printed`` returns the
    opposite-sign K_1..K_3 together with ``K_0 = -2 y3 z1 |y|^-3 Z_{4,y-z} Gamma``.
    At ``z = 0`` all kernels vanish.
    """
    _check(y, z)
    Y, z1 = _axis_or_canonical(y, z)
    tab = _backend.axis_kernels(np.ascontiguousarray(Y), z1, C)
    out = np.zeros((Y.shape[0], 4))
    out[:, 1:] = tab[:, 6:9]
    if convention == "printed":
        ny = np.linalg.norm(Y, axis=1)
        out[:, 1:] *= -1
        out[:, 0] = -2 * Y[:, 2] * z1 / ny**3 * tab[:, 4]
    elif convention != "derived":
        raise ValueError("convention must be 'derived' or 'printed'")
    return _squeeze(out, y)


@dataclass(frozen=True)
class KernelBundle:
    gamma: np.ndarray
    grad_gamma: np.ndarray
    f_z: np.ndarray
    k: np.ndarray
    bounds: dict


def kernel_bundle(y, z, C: float = C_GAMMA) -> KernelBundle:
    tab = kernel_table(y, z, C)
    k = np.zeros((tab.shape[0], 4))
    k[:, 1:] = tab[:, 6:9]
    b = bound_values(y, z, C)
    return KernelBundle(_squeeze(tab[:, 0], y), _squeeze(tab[:, 1:5], y),
                        _squeeze(tab[:, 5], y), _squeeze(k, y), b)


def bound_values(y, z, C: float = C_GAMMA) -> dict:
    """Right-hand sides of the pointwise estimates at ``(y, z)``.

    Keys ``zgamma_i``, ``zgamma_4``, ``f`` carry their stated constants;
    ``corollary_i`` and ``corollary_4`` are the constants 64 and 6 for the
    region ``|z| <= 2|y|``; ``k0_shape``, ``k_shape``, ``f_thm_shape`` and
    ``k_thm_shape`` are unit-constant shapes for calibration.
    """
    y = np.atleast_2d(as_points(y))
    z = as_points(z)
    d4 = plane_dist4(y, z)
    dm4 = 1.0 / d4
    d = d4**0.25
    ny = np.linalg.norm(y, axis=1)
    nz = float(np.linalg.norm(z))
    out = {
        "zgamma_i": 8 * (d + nz) * dm4 / (C * ny),
        "zgamma_4": 3 * nz * dm4 / (C * ny),
        "f": (np.sqrt(nz * ny) + nz) * dm4 / (C * ny**2),
        "corollary_i": 64 * dm4,
        "corollary_4": 6 * dm4,
        "k0_shape": dm4 * nz**2 / ny**3,
        "k_shape": dm4 * nz**2 / ny**2,
        "f_thm_shape": np.sqrt(nz) * dm4 / ny**2,
        "k_thm_shape": nz**2 * dm4 / ny**2,
    }
    return {key: _squeeze(v, y) for key, v in out.items()}
