"""The Heisenberg group H^2 on R^5 with the Koranyi gauge.

Points are stored as ``(x1, x2, x3, x4, x5)``; every function also accepts
stacked arrays of shape ``(..., 5)`` and broadcasts.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HPoint:
    """A point of H^2: horizontal part ``x`` and vertical coordinate ``x5``."""

    x: np.ndarray
    x5: float = 0.0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.shape != (4,):
            raise ValueError(f"horizontal part must have shape (4,), got {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x5", float(self.x5))

    @classmethod
    def from_array(cls, a) -> "HPoint":
        a = np.asarray(a, dtype=float)
        return cls(a[:4], a[4])

    def as_array(self) -> np.ndarray:
        return np.append(self.x, self.x5)

    def __neg__(self) -> "HPoint":
        return HPoint(-self.x, -self.x5)


def _arr(a) -> np.ndarray:
    if isinstance(a, HPoint):
        return a.as_array()
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != 5:
        raise ValueError(f"expected trailing dimension 5, got {a.shape}")
    return a


def _wrap(out, *inputs):
    if all(isinstance(p, HPoint) for p in inputs):
        return HPoint.from_array(out)
    return out


def group_mul(a, b):
    """Group law: horizontal parts add, the vertical part picks up the twist."""
    A, B = _arr(a), _arr(b)
    twist = (A[..., 0] * B[..., 2] - A[..., 2] * B[..., 0]
             + A[..., 1] * B[..., 3] - A[..., 3] * B[..., 1])
    out = np.empty(np.broadcast_shapes(A.shape, B.shape))
    out[..., :4] = A[..., :4] + B[..., :4]
    out[..., 4] = A[..., 4] + B[..., 4] - 0.5 * twist
    return _wrap(out, a, b)


def inverse(a):
    return -a if isinstance(a, HPoint) else -_arr(a)


def gauge_norm(a):
    """Koranyi norm ``(|x|^4 + 16 x5^2)^(1/4)``."""
    A = _arr(a)
    r2 = np.sum(A[..., :4] ** 2, axis=-1)
    return (r2 * r2 + 16.0 * A[..., 4] ** 2) ** 0.25


def gauge_dist(a, b):
    """Left-invariant gauge distance ``|a^-1 b|``."""
    return gauge_norm(group_mul(inverse(a), b))


def dilate(a, lam: float):
    """Anisotropic dilation ``(x, x5) -> (lam x, lam^2 x5)``."""
    A = _arr(a).copy()
    A[..., :4] *= lam
    A[..., 4] *= lam * lam
    return _wrap(A, a)


def embed_plane(p):
    """Lift points of the plane {x5 = 0} into H^2."""
    p = np.asarray(p, dtype=float)
    return np.concatenate([p, np.zeros(p.shape[:-1] + (1,))], axis=-1)
