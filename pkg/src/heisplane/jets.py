"""Second-order forward differentiation on R^4 and the frame operators.

A :class:`Jet2` carries value, gradient and Hessian for a batch of points.
Scalar fields are written once as ordinary arithmetic over the four
coordinate jets and can then be differentiated exactly to second order.
"""
from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .errors import DegeneratePoint
from .plane_geom import GENERATORS, M4, as_points


class Jet2:
    """Value, gradient ``(..., 4)`` and symmetric Hessian ``(..., 4, 4)``."""

    __slots__ = ("value", "grad", "hess")
    __array_priority__ = 100

    def __init__(self, value, grad, hess):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, c, shape=()):
        c = np.broadcast_to(np.asarray(c, dtype=float), shape)
        return cls(c, np.zeros(c.shape + (4,)), np.zeros(c.shape + (4, 4)))

    def _lift(self, other):
        return other if isinstance(other, Jet2) else Jet2.constant(other, np.shape(self.value))

    def compose(self, f0, f1, f2) -> "Jet2":
        """Chain rule for a univariate map with derivatives ``f0, f1, f2`` at the value."""
        g = self.grad
        hess = f2[..., None, None] * (g[..., :, None] * g[..., None, :]) + f1[..., None, None] * self.hess
        return Jet2(f0, f1[..., None] * g, hess)

    def __add__(self, other):
        o = self._lift(other)
        return Jet2(self.value + o.value, self.grad + o.grad, self.hess + o.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            return Jet2(self.value * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        cross = a.grad[..., :, None] * b.grad[..., None, :]
        return Jet2(
            a.value * b.value,
            a.value[..., None] * b.grad + b.value[..., None] * a.grad,
            # Sum the symmetric pieces separately so the result is exactly symmetric.
            (a.value[..., None, None] * b.hess + b.value[..., None, None] * a.hess)
            + (cross + np.swapaxes(cross, -1, -2)),
        )

    __rmul__ = __mul__

    def reciprocal(self):
        v = self.value
        return self.compose(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, Jet2):
            raise TypeError("jet exponents are not supported")
        p = float(p)
        if p == 2.0:
            return self * self
        v = self.value
        return self.compose(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __repr__(self):
        return f"Jet2(value={self.value!r})"


def sqrt(u):
    if not isinstance(u, Jet2):
        return np.sqrt(u)
    s = np.sqrt(u.value)
    return u.compose(s, 0.5 / s, -0.25 / (s * u.value))


def exp(u):
    if not isinstance(u, Jet2):
        return np.exp(u)
    e = np.exp(u.value)
    return u.compose(e, e, e)


def log(u):
    if not isinstance(u, Jet2):
        return np.log(u)
    v = u.value
    return u.compose(np.log(v), 1.0 / v, -1.0 / v**2)


def seed(y) -> tuple:
    """Coordinate jets ``(y1, y2, y3, y4)`` at the points ``y``."""
    y = as_points(y)
    shape = y.shape[:-1]
    out = []
    for k in range(4):
        g = np.zeros(shape + (4,))
        g[..., k] = 1.0
        out.append(Jet2(y[..., k], g, np.zeros(shape + (4, 4))))
    return tuple(out)


class ScalarField:
    """A smooth function on R^4 written over coordinate jets.

    ``fn`` receives four coordinates (jets or plain arrays) and returns a
    value of the same kind.  ``support`` is an optional ``(center, radius)``
    Euclidean ball containing the support.
    """

    def __init__(self, fn: Callable, support: Optional[tuple] = None, name: str = ""):
        self.fn = fn
        self.support = support
        self.name = name or getattr(fn, "__name__", "field")

    def jet(self, y) -> Jet2:
        y = as_points(y)
        out = self.fn(*seed(y))
        if not isinstance(out, Jet2):
            out = Jet2.constant(out, y.shape[:-1])
        return out

    def __call__(self, y) -> np.ndarray:
        y = as_points(y)
        return np.broadcast_to(np.asarray(self.fn(*np.moveaxis(y, -1, 0)), dtype=float), y.shape[:-1])


def field(fn=None, *, support=None, name=""):
    """Decorator turning a coordinate function into a :class:`ScalarField`."""
    if fn is None:
        return lambda f: ScalarField(f, support, name)
    return ScalarField(fn, support, name)


def _as_jet(u, y) -> Jet2:
    return u if isinstance(u, Jet2) else u.jet(y)


def frame_coeffs(i: int, x) -> np.ndarray:
    """Coefficient vector of T_i at ``x`` (column i of the frame matrix)."""
    if i not in (1, 2, 3, 4):
        raise ValueError("frame index must be 1..4")
    return np.einsum("ij,...j->...i", GENERATORS[i - 1], as_points(x))


def _coeffs(i, y, z):
    """Coefficients and their constant Jacobian ``d a_l / d y_k``; T_4 is shifted by z."""
    y = as_points(y)
    if i == 4 and z is not None:
        return frame_coeffs(4, y - as_points(z)), M4
    return frame_coeffs(i, y), GENERATORS[i - 1]


def _norm(y):
    r = np.linalg.norm(as_points(y), axis=-1)
    if np.any(r == 0):
        raise DegeneratePoint("normalized frame is undefined at the origin")
    return r


def apply_T(i: int, u, y) -> np.ndarray:
    """``T_i u(y) = <a_i(y), grad u(y)>`` (unshifted T_4)."""
    J = _as_jet(u, y)
    return np.einsum("...k,...k->...", frame_coeffs(i, y), J.grad)


def apply_Z(i: int, u, y) -> np.ndarray:
    """``Z_i = T_i/|y|`` for i <= 3 and ``Z_4 = T_4/|y|^2``."""
    r = _norm(y)
    return apply_T(i, u, y) / (r if i <= 3 else r * r)


def apply_T4_shifted(u, y, z, form: str = "T") -> np.ndarray:
    """``T_{4,y-z} u`` or, with ``form='Z'``, ``Z_{4,y-z} u = T_{4,y-z} u / |y|``."""
    J = _as_jet(u, y)
    a = frame_coeffs(4, as_points(y) - as_points(z))
    t = np.einsum("...k,...k->...", a, J.grad)
    if form == "Z":
        return t / _norm(y)
    if form != "T":
        raise ValueError("form must be 'T' or 'Z'")
    return t


def apply_TT(i: int, j: int, u, y, z=None) -> np.ndarray:
    """``T_i(T_j u)(y)``; index 4 uses coefficients shifted by ``z`` when given."""
    J = _as_jet(u, y)
    ai, _ = _coeffs(i, y, z)
    aj, daj = _coeffs(j, y, z)
    # T_j u = sum_l a^j_l d_l u, so d_k(T_j u) = sum_l daj[l,k] d_l u + a^j_l H_lk.
    dk = np.einsum("lk,...l->...k", daj, J.grad) + np.einsum("...l,...lk->...k", aj, J.hess)
    return np.einsum("...k,...k->...", ai, dk)


def _m4_pairing(y, z):
    return np.einsum("...i,...i->...", np.einsum("ij,...j->...i", M4, as_points(z)), as_points(y))


def laplacian_z(u, y, z, convention: str = "derived") -> np.ndarray:
    """The non-local Laplacian at ``y`` with pole ``z``.

    ``-(sum_{i<=3} T_i^2 u + 3 T_1 u + T_{4,y-z}^2 u)/|y|^2 + s <M4 z, y> T_{4,y-z} u/|y|^4``
    with ``s = -1`` for the divergence-form operator (``'derived'``) and
    ``s = +1`` for the sign as commonly printed (``'printed'``).  On the first
    axis ``<M4 z, y> = z1 y3``.
    """
    J = _as_jet(u, y)
    r2 = _norm(y) ** 2
    second = sum(apply_TT(i, i, J, y, z) for i in (1, 2, 3)) + apply_TT(4, 4, J, y, z)
    t1 = apply_T(1, J, y)
    t4 = apply_T4_shifted(J, y, z)
    sign = {"derived": -1.0, "printed": 1.0}[convention]
    return -(second + 3.0 * t1) / r2 + sign * _m4_pairing(y, z) * t4 / (r2 * r2)


def adjoint_apply(i: int, u, y, z=None, convention: str = "derived") -> np.ndarray:
    """Formal adjoint of ``Z_i`` (``Z_{4,y-z}`` for i = 4) with respect to ``dy``.

    ``Z_1^* = -Z_1 - 3/|y|``, ``Z_i^* = -Z_i`` for i = 2, 3, and
    ``Z_{4,y-z}^* = -Z_{4,y-z} + s <M4 z, y>/|y|^3`` with ``s = -1`` derived
    from the divergence of the coefficient field and ``s = +1`` as printed.
    """
    J = _as_jet(u, y)
    r = _norm(y)
    if i == 1:
        return -apply_T(1, J, y) / r - 3.0 * J.value / r
    if i in (2, 3):
        return -apply_T(i, J, y) / r
    if i == 4:
        if z is None:
            raise ValueError("the shifted adjoint needs a pole z")
        sign = {"derived": -1.0, "printed": 1.0}[convention]
        return -apply_T4_shifted(J, y, z, form="Z") + sign * _m4_pairing(y, z) * J.value / r**3
    raise ValueError("frame index must be 1..4")
