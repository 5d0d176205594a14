"""Geometry of the plane M = {(x, 0)} inside H^2.

Every function accepts a :class:`PlanePoint` or an array whose trailing
dimension is 4, and broadcasts over leading dimensions.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePoint

N = np.array([1.0, 0.0, 0.0, 0.0])

# Column j of the frame matrix is M_j x; these are the constant generators.
M2 = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]], dtype=float)
M3 = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]], dtype=float)
M4 = np.array([[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
GENERATORS = (np.eye(4), M2, M3, M4)


@dataclass(frozen=True)
class PlanePoint:
    """A point of M, identified with its coordinates in R^4."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (4,):
            raise ValueError(f"plane point must have shape (4,), got {p.shape}")
        object.__setattr__(self, "p", p)

    def __array__(self, dtype=None, copy=None):
        return self.p if dtype is None else self.p.astype(dtype)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.p))

    def is_characteristic(self) -> bool:
        return not np.any(self.p)


def as_points(x) -> np.ndarray:
    """Coerce to a float array with trailing dimension 4."""
    a = np.asarray(x.p if isinstance(x, PlanePoint) else x, dtype=float)
    if a.shape[-1] != 4:
        raise ValueError(f"expected trailing dimension 4, got {a.shape}")
    return a


def frame_matrix(x) -> np.ndarray:
    """The 4x4 frame matrix A_x (batched); column i holds the coefficients of T_i."""
    x = as_points(x)
    x1, x2, x3, x4 = np.moveaxis(x, -1, 0)
    rows = [
        [x1, -x4, -x2, -x3],
        [x2, x3, x1, -x4],
        [x3, -x2, x4, x1],
        [x4, x1, -x3, x2],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def isometry_matrix(x) -> np.ndarray:
    """Column permutation ``[x, M3 x, M4 x, M2 x]`` of A_x.

    Unlike A_x this matrix preserves the plane distance up to the factor |x|
    and composes as a homomorphism, so it is the map used to move a pole
    onto the first axis.
    """
    return frame_matrix(x)[..., [0, 2, 3, 1]]


@dataclass(frozen=True)
class RotationFrame:
    """The frame matrix A_x together with the point generating it."""

    a: np.ndarray
    base: PlanePoint

    def apply(self, y) -> np.ndarray:
        return as_points(y) @ self.a.T

    def inverse_apply(self, y) -> np.ndarray:
        return as_points(y) @ self.a / (self.base.norm ** 2)


def rotation_matrix(x) -> RotationFrame:
    p = PlanePoint(as_points(x))
    return RotationFrame(frame_matrix(p.p), p)


def quat_mul(y, x) -> np.ndarray:
    """Product ``A_y x`` in the matrix convention of the frame."""
    return np.einsum("...ij,...j->...i", frame_matrix(y), as_points(x))


def quat_inv(x) -> np.ndarray:
    """``A_x^T n / |x|^2``: a right inverse for :func:`quat_mul`."""
    x = as_points(x)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 == 0):
        raise DegeneratePoint("quaternion inverse is undefined at the origin")
    x1, x2, x3, x4 = np.moveaxis(x, -1, 0)
    return np.stack([x1, -x4, -x2, -x3], axis=-1) / r2[..., None]


def symplectic(x, y) -> np.ndarray:
    """The twist ``x1 y3 - x3 y1 + x2 y4 - y2 x4`` entering the distance."""
    x, y = as_points(x), as_points(y)
    return (x[..., 0] * y[..., 2] - x[..., 2] * y[..., 0]
            + x[..., 1] * y[..., 3] - y[..., 1] * x[..., 3])


def plane_dist4(x, y) -> np.ndarray:
    """Fourth power of the plane distance."""
    x, y = as_points(x), as_points(y)
    r2 = np.sum((x - y) ** 2, axis=-1)
    return r2 * r2 + 4.0 * symplectic(x, y) ** 2


def plane_dist(x, y):
    d = plane_dist4(x, y) ** 0.25
    return float(d) if np.ndim(d) == 0 else d


def plane_dist_via_frame(x, y, via: str = "x"):
    """Distance written through the fourth component of ``A_x^T y`` (or ``A_y^T x``)."""
    x, y = as_points(x), as_points(y)
    base, other = (x, y) if via == "x" else (y, x)
    c4 = np.einsum("...i,...i->...", np.einsum("ij,...j->...i", M4, base), other)
    r2 = np.sum((x - y) ** 2, axis=-1)
    return (r2 * r2 + 4.0 * c4 ** 2) ** 0.25


class Regime(enum.Enum):
    EUCLIDEAN = "Euclidean"
    SUBRIEMANNIAN = "SubRiemannian"


def regime_classify(x, y) -> Regime:
    """Compare |x|^4 with the squared fourth component of ``A_y^T x``.

    Ties go to the Euclidean side.
    """
    x, y = as_points(x), as_points(y)
    r2 = float(np.sum(x * x))
    if r2 == 0.0:
        raise DegeneratePoint("regime classification needs x != 0")
    c4 = float(frame_matrix(y)[:, 3] @ x)
    return Regime.EUCLIDEAN if r2 * r2 <= c4 * c4 else Regime.SUBRIEMANNIAN


def ball_contains(c, r: float, y) -> bool:
    if r < 0:
        raise ValueError("radius must be non-negative")
    return bool(plane_dist(c, y) <= r)
