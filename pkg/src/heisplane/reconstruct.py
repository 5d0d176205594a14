"""Recover point values of a test function from its frame derivatives.

For ``z`` on the plane and ``u`` smooth with compact support,

    u(z) = sum_{i<=3} int (Z_i Gamma + K_i)(y, z) Z_i u(y) |y| dy - int f_z(y) u(y) |y| dy,

and equivalently, before trading ``Z_{4,y-z}`` for horizontal fields,

    u(z) = sum_{i<=3} int Z_i Gamma Z_i u |y| dy + int Z_{4,y-z} Gamma Z_{4,y-z} u |y| dy
           - int f_z u |y| dy.

General poles are moved to the first axis; the test function is rotated
with them, so the bump's centre is expressed in canonical coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _backend, jets, kernels
from .plane_geom import as_points
from .quadrature import IntegralEstimate, QuadratureSpec, integrate_mu, plan_charts, run_pieces

# Columns of the fused integrand.
_G3, _G4, _FU, _KZ, _U, _K0P = range(6)


@dataclass(frozen=True)
class BumpFunction:
    """``amplitude * exp(1 - 1/(1 - |y-c|^2/r^2))`` inside ``B(c, r)``, zero outside."""

    center: np.ndarray
    radius: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(as_points(self.center), dtype=float))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def support(self):
        return self.center, self.radius

    @property
    def sup_norm(self) -> float:
        return abs(self.amplitude)

    def __call__(self, y) -> np.ndarray:
        y = as_points(y)
        s = np.sum((y - self.center) ** 2, axis=-1) / self.radius**2
        q = np.where(s < 1.0, 1.0 - s, 1.0)
        out = np.where(s < 1.0, self.amplitude * np.exp(1.0 - 1.0 / q), 0.0)
        return float(out) if out.ndim == 0 else out

    def field(self) -> jets.ScalarField:
        """Jet-differentiable form, valid inside the support ball."""
        c, r2, a = self.center, self.radius**2, self.amplitude

        def fn(y1, y2, y3, y4):
            s = ((y1 - c[0]) ** 2 + (y2 - c[1]) ** 2 + (y3 - c[2]) ** 2 + (y4 - c[3]) ** 2) / r2
            return jets.exp(1.0 - 1.0 / (1.0 - s)) * a

        return jets.ScalarField(fn, support=(c, self.radius), name="bump")

    def rotated(self, rotation) -> "BumpFunction":
        """The bump ``u o rotation`` (``rotation`` orthogonal)."""
        return BumpFunction(self.center @ np.asarray(rotation), self.radius, self.amplitude)


@dataclass(frozen=True)
class ReconstructionReport:
    target: float
    reconstructed: float
    term_gradient: float
    term_zero_order: float
    error_indicator: float
    spec_used: QuadratureSpec
    weak_form: float = float("nan")
    samples_used: int = 0

    @property
    def error(self) -> float:
        return abs(self.reconstructed - self.target)

    def as_dict(self) -> dict:
        return {"target": self.target, "reconstructed": self.reconstructed,
                "term_gradient": self.term_gradient, "term_zero_order": self.term_zero_order,
                "weak_form": self.weak_form, "error": self.error,
                "error_indicator": self.error_indicator, "samples_used": self.samples_used,
                "spec": self.spec_used.as_dict()}


class _FusedIntegrand:
    """All representation integrands in canonical coordinates."""

    def __init__(self, z1, C, center, radius, amplitude):
        self.args = (float(z1), float(C), np.ascontiguousarray(center, dtype=float),
                     float(radius), float(amplitude))

    def __call__(self, Y):
        return _backend.bump_terms(np.ascontiguousarray(Y), *self.args)

    def weighted(self, Y, w):
        return _backend.bump_sums(np.ascontiguousarray(Y), np.ascontiguousarray(w), *self.args)


def _integrate_terms(u: BumpFunction, z, spec: QuadratureSpec, C: float) -> IntegralEstimate:
    z = as_points(z)
    sing = [z, np.zeros(4)] if np.any(z) else [np.zeros(4)]
    plan = plan_charts(u.center, u.radius, sing, spec.exclusion)
    c = plan.to_canonical(u.center)
    func = _FusedIntegrand(plan.z1, C, c, u.radius, u.amplitude)
    return run_pieces(plan.pieces, func, spec, ncomp=_backend.N_BUMP_COLS)


def reconstruct(u: BumpFunction, z, spec: QuadratureSpec = QuadratureSpec(),
                C: float = kernels.C_GAMMA, tol=None) -> ReconstructionReport:
    """Evaluate the representation formula for ``u`` at ``z``.

    At ``z = 0`` every kernel other than the gradient of Gamma vanishes and
    the formula reduces to its gradient term.
    """
    est = _integrate_terms(u, z, spec, C)
    v, e = est.value, est.error_indicator
    grad = v[_G3] + v[_KZ]
    zero = -v[_FU]
    err = float(abs(e[_G3]) + abs(e[_KZ]) + abs(e[_FU]))
    rep = ReconstructionReport(
        target=float(u(as_points(z))), reconstructed=float(grad + zero),
        term_gradient=float(grad), term_zero_order=float(zero), error_indicator=err,
        spec_used=spec, weak_form=float(v[_G3] + v[_G4] - v[_FU]), samples_used=est.samples_used)
    IntegralEstimate(rep.reconstructed, err, est.samples_used).check(tol)
    return rep


def solfond_check(u: BumpFunction, z, spec: QuadratureSpec = QuadratureSpec(),
                  C: float = kernels.C_GAMMA, convention: str = "derived", tol=None) -> float:
    """Residual of the weak form of ``Delta_z Gamma = delta_z + f_z`` tested against ``u``.

    ``derived`` tests ``u(z) = sum_{i<=4} int Z_i Gamma Z_i u |y| - int f_z u |y|``;
    ``printed`` tests the opposite overall sign.
    """
    z = as_points(z)
    if not np.any(z):
        raise ValueError("the weak form is stated for a non-characteristic pole")
    est = _integrate_terms(u, z, spec, C)
    IntegralEstimate(0.0, float(np.sum(np.abs(est.error_indicator[[_G3, _G4, _FU]]))),
                     est.samples_used).check(tol)
    v = est.value
    weak = v[_G3] + v[_G4] - v[_FU]
    if convention == "printed":
        weak = -weak
    elif convention != "derived":
        raise ValueError("convention must be 'derived' or 'printed'")
    return float(abs(u(z) - weak))


@dataclass(frozen=True)
class LimitRecord:
    z: np.ndarray
    k0_integral: float
    k0_printed_integral: float
    f_integral: float
    k_sum: float
    target_proof_weight: float
    target_statement_weight: float
    error_indicator: float


def _ohno_target(u: BumpFunction, spec: QuadratureSpec, power: int) -> float:
    """``int (|y|^p/2)(Z_2 Z_{4,y} Gamma Z_3 u - Z_3 Z_{4,y} Gamma Z_2 u)(y, 0) |y| dy``."""
    fld = u.field()

    def integrand(Y):
        Y = np.atleast_2d(Y)
        ny = np.linalg.norm(Y, axis=1)
        zz = kernels.z4_second_derivatives(Y, 0.0)
        J = fld.jet(Y)
        z2u = jets.apply_Z(2, J, Y)
        z3u = jets.apply_Z(3, J, Y)
        return 0.5 * ny**power * (zz[:, 0] * z3u - zz[:, 1] * z2u)

    small = spec.with_budget(min(spec.budget, 1 << 16))
    return float(integrate_mu(integrand, [np.zeros(4)], small, support=u.support).value)


def limit_study(u: BumpFunction, z_seq: Sequence, spec: QuadratureSpec = QuadratureSpec(),
                C: float = kernels.C_GAMMA) -> list:
    """Zero-order and kernel integrals along a sequence of poles tending to 0.

    The limiting target is reported with both weights ``|y|/2`` and
    ``|y|^2/2``.
    """
    t1 = _ohno_target(u, spec, 1)
    t2 = _ohno_target(u, spec, 2)
    out = []
    for z in z_seq:
        z = as_points(z)
        if not np.any(z):
            raise ValueError("the sequence must avoid the characteristic point")
        est = _integrate_terms(u, z, spec, C)
        v, e = est.value, est.error_indicator
        out.append(LimitRecord(z=z, k0_integral=0.0, k0_printed_integral=float(v[_K0P]),
                               f_integral=float(v[_FU]), k_sum=float(v[_KZ]),
                               target_proof_weight=t1, target_statement_weight=t2,
                               error_indicator=float(np.max(e[[_FU, _KZ, _K0P]]))))
    return out
