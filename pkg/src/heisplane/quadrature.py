"""Integration against the plane measure ``mu = |y| dy``.

Singular integrands are handled with charts rather than excision.  Around
a pole ``s != 0`` (moved to ``(|s|, 0, 0, 0)`` by an isometry) the chart

    y = s + (rho w1, rho w2, h(rho) w3, rho w4),   h(rho) = rho^2 / (2|s| + rho),

with ``w`` on the unit 3-sphere, matches the anisotropic balls of the plane
distance near the pole (``h ~ rho^2 / 2|s|``) and is Euclidean far away, so
kernels of type ``d^-4`` become bounded functions of the chart variables.
The characteristic point 0 gets an ordinary polar chart blended in with a
smooth partition of unity.

``AdaptiveProduct`` applies a composite Gauss-Legendre product rule in the
chart variables and reports the difference to the rule with half as many
cells as its error indicator.  ``MonteCarlo`` samples the same chart boxes
uniformly, which is radial importance sampling around each singularity.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import BudgetExhausted, DegeneratePoint
from .plane_geom import as_points, isometry_matrix

DEFAULT_SEED = 0x5EEDCAFE
EPS_FLOOR = 1e-30
MC_CHUNK = 1 << 16


class Method(enum.Enum):
    MONTE_CARLO = "mc"
    ADAPTIVE_PRODUCT = "adaptive"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, cls):
            return value
        v = str(value).lower()
        aliases = {"mc": cls.MONTE_CARLO, "montecarlo": cls.MONTE_CARLO,
                   "adaptive": cls.ADAPTIVE_PRODUCT, "adaptiveproduct": cls.ADAPTIVE_PRODUCT}
        if v not in aliases:
            raise ValueError(f"unknown method {value!r}")
        return aliases[v]


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration strategy.

    ``budget`` is the number of integrand evaluations per chart (product
    rule) or samples per chart (Monte Carlo).  ``exclusion`` is the radius
    of the partition-of-unity ball around the characteristic point when a
    second pole is present; ``None`` picks half the distance to that pole.
    ``support_radius`` bounds the support of integrands that do not declare
    one themselves.
    """

    method: Method = Method.ADAPTIVE_PRODUCT
    budget: int = 1 << 20
    seed: int = DEFAULT_SEED
    exclusion: Optional[float] = None
    support_radius: float = 1.0
    order: int = 2
    threads: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "budget", int(self.budget))
        if self.budget < 1:
            raise ValueError("budget must be positive")
        if self.order < 1:
            raise ValueError("order must be positive")

    def with_budget(self, budget) -> "QuadratureSpec":
        return replace(self, budget=int(budget))

    def as_dict(self) -> dict:
        return {"method": self.method.value, "budget": self.budget, "seed": self.seed,
                "exclusion": self.exclusion, "support_radius": self.support_radius,
                "order": self.order}


@dataclass(frozen=True)
class IntegralEstimate:
    value: float | np.ndarray
    error_indicator: float | np.ndarray
    samples_used: int

    def __post_init__(self):
        if np.any(np.asarray(self.error_indicator) < 0):
            raise ValueError("error indicator must be non-negative")

    def check(self, tol: Optional[float]) -> "IntegralEstimate":
        if tol is not None and np.max(self.error_indicator) > tol:
            raise BudgetExhausted(
                f"error indicator {np.max(self.error_indicator):.3e} exceeds tolerance {tol:.3e}", self)
        return self


def thread_count(spec: Optional[QuadratureSpec] = None) -> int:
    if spec is not None and spec.threads:
        return max(1, int(spec.threads))
    env = os.environ.get("HEIS_PLANE_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def smooth_step(t):
    """C-infinity cutoff: 1 for ``t <= 1/2``, 0 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    s = np.clip(2.0 * t - 1.0, 0.0, 1.0)
    a = np.where(s < 1.0, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    b = np.where(s > 0.0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
    return a / (a + b)


# ---------------------------------------------------------------- charts

def _sphere(psi, theta, phi):
    sp, st = np.sin(psi), np.sin(theta)
    om = np.stack([np.cos(psi), sp * np.cos(theta), sp * st * np.cos(phi), sp * st * np.sin(phi)], axis=-1)
    return om, sp * sp * st


class Chart:
    """A parametrization of a region of R^4 by a box of four variables."""

    box: tuple

    def map(self, u0, psi, theta, phi):
        """Return points ``(n, 4)`` and Jacobians ``(n,)``."""
        raise NotImplementedError


class PolarChart(Chart):
    """Euclidean polar coordinates around ``center`` for ``rho`` in ``[r0, r1]``."""

    def __init__(self, center, r0, r1):
        self.center = np.asarray(center, dtype=float)
        self.box = ((r0, r1), (0.0, math.pi), (0.0, math.pi), (0.0, 2 * math.pi))

    def map(self, rho, psi, theta, phi):
        om, s = _sphere(psi, theta, phi)
        return self.center + rho[:, None] * om, rho**3 * s


class GradedChart(Chart):
    """Anisotropic polar coordinates around ``(z1, 0, 0, 0)``; see module docstring."""

    def __init__(self, z1, rmax):
        self.z1 = float(z1)
        self.box = ((0.0, rmax), (0.0, math.pi), (0.0, math.pi), (0.0, 2 * math.pi))

    @staticmethod
    def covering_radius(z1, L):
        """Chart radius covering every point within Euclidean distance L of the pole."""
        return 0.5 * (L + math.sqrt(L * L + 8.0 * z1 * L))

    def map(self, rho, psi, theta, phi):
        om, s = _sphere(psi, theta, phi)
        z1 = self.z1
        h = rho**2 / (2 * z1 + rho)
        hp = rho * (rho + 4 * z1) / (2 * z1 + rho) ** 2
        w3 = om[:, 2] ** 2
        jac = s * (rho**2 * h * (1 - w3) + rho**3 * hp * w3)
        Y = np.stack([z1 + rho * om[:, 0], rho * om[:, 1], h * om[:, 2], rho * om[:, 3]], axis=-1)
        return Y, jac


def quasi_radius(w3sq, z1, r):
    """Chart radius ``rho`` of the sphere ``d = r`` in direction ``w``.

    Solves ``t^2 ((1 - w3^2 + b t)^2 + w3^2) = r^4`` for ``t = rho^2`` with
    ``b = w3^2 / (4 z1^2)``; the left side is convex and increasing, so
    Newton iteration from an upper bound converges monotonically.
    """
    a = 1.0 - w3sq
    b = w3sq / (4.0 * z1 * z1)
    r4 = r**4
    t = r * r / np.sqrt(a * a + w3sq)
    for _ in range(60):
        p = a + b * t
        g = t * t * (p * p + w3sq) - r4
        dg = 2 * t * (p * p + w3sq) + 2 * t * t * p * b
        step = g / dg
        t = t - step
        if np.all(np.abs(step) <= 1e-15 * np.abs(t)):
            break
    return np.sqrt(t)


class DistBallChart(Chart):
    """The ball ``{d(y, (z1,0,0,0)) <= r}`` with ``rho = s * rho_max(w)``, ``s`` in [0, 1]."""

    def __init__(self, z1, r):
        if z1 <= 0:
            raise DegeneratePoint("use a polar chart at the characteristic point")
        self.z1, self.r = float(z1), float(r)
        self.box = ((0.0, 1.0), (0.0, math.pi), (0.0, math.pi), (0.0, 2 * math.pi))

    def map(self, sv, psi, theta, phi):
        om, s = _sphere(psi, theta, phi)
        z1 = self.z1
        w3 = om[:, 2] ** 2
        rmax = quasi_radius(w3, z1, self.r)
        rho = sv * rmax
        Y = np.stack([z1 + rho * om[:, 0], rho * om[:, 1], rho**2 * om[:, 2] / (2 * z1), rho * om[:, 3]], axis=-1)
        jac = s * rmax * rho**4 * (1 + w3) / (2 * z1)
        return Y, jac


# ---------------------------------------------------------------- rules

def composite_gauss(m: int, a: float, b: float, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, m + 1)
    h = (b - a) / m
    X = (edges[:-1, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
    W = np.tile(0.5 * h * w, m)
    return X, W


def cells_for_budget(budget: int, order: int) -> int:
    return max(1, int(round((budget / order**4) ** 0.25)))


@dataclass
class Piece:
    """A chart with a partition-of-unity weight, all in canonical coordinates."""

    chart: Chart
    weight: Optional[Callable] = None


def _product_slices(chart: Chart, m: int, order: int):
    rules = [composite_gauss(m, lo, hi, order) for lo, hi in chart.box]
    (x0, w0), rest = rules[0], rules[1:]
    grids = np.meshgrid(*[r[0] for r in rest], indexing="ij")
    P = [g.ravel() for g in grids]
    Wr = np.einsum("a,b,c->abc", *[r[1] for r in rest]).ravel()
    for k in range(len(x0)):
        yield np.full(P[0].shape, x0[k]), P[0], P[1], P[2], Wr * w0[k]


def _eval_slice(piece: Piece, func: Callable, params, reduce_fn):
    u0, a, b, c, w = params
    Y, jac = piece.chart.map(u0, a, b, c)
    w = w * jac
    if piece.weight is not None:
        w = w * piece.weight(Y)
    keep = w != 0.0
    if not np.all(keep):
        Y, w = Y[keep], w[keep]
    return reduce_fn(func, Y, w)


def _sum_in_order(parts, ncomp):
    total = np.zeros(ncomp)
    for p in parts:
        if p is not None:
            total += p
    return total


def _product_rule(pieces: Sequence[Piece], func, ncomp, m, order, threads):
    jobs = [(pc, prm) for pc in pieces for prm in _product_slices(pc.chart, m, order)]

    def run(job):
        pc, prm = job
        return _eval_slice(pc, func, prm, _reduce_sum)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    n = sum(len(j[1][4]) for j in jobs)
    return _sum_in_order(parts, ncomp), n


def _reduce_sum(func, Y, w):
    if Y.shape[0] == 0:
        return None
    weighted = getattr(func, "weighted", None)
    if weighted is not None:
        return np.atleast_1d(np.asarray(weighted(Y, w), dtype=float))
    return np.atleast_1d(w @ np.asarray(func(Y), dtype=float))


def _reduce_moments(func, Y, w):
    if Y.shape[0] == 0:
        return None
    vals = np.asarray(func(Y), dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    v = vals * w[:, None]
    return np.concatenate([v.sum(axis=0), (v * v).sum(axis=0)])


def _monte_carlo(pieces: Sequence[Piece], func, ncomp, budget, seed, threads):
    jobs = []
    for ci, pc in enumerate(pieces):
        nchunks = max(1, -(-budget // MC_CHUNK))
        seqs = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, ci]).spawn(nchunks)
        for k, sq in enumerate(seqs):
            n = min(MC_CHUNK, budget - k * MC_CHUNK)
            jobs.append((ci, pc, sq, n))

    def run(job):
        _, pc, sq, n = job
        rng = np.random.default_rng(sq)
        lo = np.array([b[0] for b in pc.chart.box])
        hi = np.array([b[1] for b in pc.chart.box])
        U = lo + (hi - lo) * rng.random((n, 4))
        vol = float(np.prod(hi - lo))
        prm = (U[:, 0], U[:, 1], U[:, 2], U[:, 3], np.full(n, vol))
        return _eval_slice(pc, func, prm, _reduce_moments)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    value = np.zeros(ncomp)
    var = np.zeros(ncomp)
    for ci in range(len(pieces)):
        s1 = np.zeros(ncomp)
        s2 = np.zeros(ncomp)
        for job, p in zip(jobs, parts):
            if job[0] == ci and p is not None:
                s1 += p[:ncomp]
                s2 += p[ncomp:]
        mean = s1 / budget
        value += mean
        var += np.maximum(s2 / budget - mean**2, 0.0) / max(budget - 1, 1)
    return value, np.sqrt(var), budget * len(pieces)


def run_pieces(pieces: Sequence[Piece], func, spec: QuadratureSpec, ncomp: int = 1) -> IntegralEstimate:
    """Integrate ``func`` (canonical coordinates, measure included) over the pieces."""
    threads = thread_count(spec)
    if spec.method is Method.MONTE_CARLO:
        value, err, n = _monte_carlo(pieces, func, ncomp, spec.budget, spec.seed, threads)
    else:
        m = cells_for_budget(spec.budget, spec.order)
        fine, n1 = _product_rule(pieces, func, ncomp, m, spec.order, threads)
        coarse, n2 = _product_rule(pieces, func, ncomp, max(1, m // 2), spec.order, threads)
        value, err, n = fine, np.abs(fine - coarse), n1 + n2
    if ncomp == 1:
        return IntegralEstimate(float(value[0]), float(err[0]), int(n))
    return IntegralEstimate(value, err, int(n))


# ---------------------------------------------------------------- planning

@dataclass
class Plan:
    """Charts for one integral; ``rotation`` maps canonical to original coordinates."""

    pieces: list
    rotation: np.ndarray = field(default_factory=lambda: np.eye(4))
    z1: float = 0.0

    def to_canonical(self, y):
        return as_points(y) @ self.rotation

    def to_original(self, y):
        return as_points(y) @ self.rotation.T


def plan_charts(center, radius, singularities=(), exclusion=None) -> Plan:
    """Choose charts covering the Euclidean ball ``B(center, radius)``.

    At most one singularity may differ from the origin.
    """
    center = np.asarray(as_points(center), dtype=float)
    sing = [as_points(s) for s in singularities]
    nonzero = [s for s in sing if np.any(s)]
    has_origin = any(not np.any(s) for s in sing)
    if len(nonzero) > 1:
        raise ValueError("at most one singularity away from the origin is supported")
    dist0 = float(np.linalg.norm(center)) - radius
    if nonzero:
        s = nonzero[0]
        z1 = float(np.linalg.norm(s))
        R = isometry_matrix(s / z1)
        c = center @ R
        L = float(np.linalg.norm(c - np.array([z1, 0, 0, 0]))) + radius
        main = GradedChart(z1, GradedChart.covering_radius(z1, L))
        r0 = 0.5 * z1 if exclusion is None else float(exclusion)
        if r0 >= z1:
            raise ValueError("exclusion radius must be smaller than the pole's distance to 0")
        if dist0 < r0:
            def outer(Y, r0=r0):
                return 1.0 - smooth_step(np.linalg.norm(Y, axis=1) / r0)

            def inner(Y, r0=r0):
                return smooth_step(np.linalg.norm(Y, axis=1) / r0)

            pieces = [Piece(main, outer), Piece(PolarChart(np.zeros(4), 0.0, r0), inner)]
        else:
            pieces = [Piece(main)]
        return Plan(pieces, R, z1)
    if has_origin and dist0 < 0.5 * radius:
        return Plan([Piece(PolarChart(np.zeros(4), 0.0, float(np.linalg.norm(center)) + radius))])
    return Plan([Piece(PolarChart(center, 0.0, radius))])


def _support_of(f, spec):
    sup = getattr(f, "support", None)
    if sup is None:
        return np.zeros(4), float(spec.support_radius)
    c, r = sup
    return as_points(c), float(r)


def integrate_mu(f, singularities=(), spec: QuadratureSpec = QuadratureSpec(), tol=None,
                 support=None) -> IntegralEstimate:
    """Estimate ``int f(y) |y| dy`` over the support of ``f``.

    ``f`` maps points ``(n, 4)`` to values ``(n,)`` or ``(n, k)``.  The
    support is ``support`` if given, else ``f.support``, else the ball of
    radius ``spec.support_radius`` about 0.
    """
    c, r = support if support is not None else _support_of(f, spec)
    plan = plan_charts(c, r, singularities, spec.exclusion)
    probe = np.asarray(f(np.atleast_2d(as_points(c)) + 1e-3 * r), dtype=float)
    ncomp = 1 if probe.ndim <= 1 else probe.shape[-1]
    c = as_points(c)

    def g(Y):
        Yo = plan.to_original(Y)
        inside = np.sum((Yo - c) ** 2, axis=1) < r * r
        vals = np.asarray(f(Yo), dtype=float)
        mu = np.linalg.norm(Yo, axis=1) * inside
        return vals * mu if vals.ndim == 1 else vals * mu[:, None]

    return run_pieces(plan.pieces, g, spec, ncomp).check(tol)


def mu_ball(c, r: float, spec: QuadratureSpec = QuadratureSpec(), tol=None) -> IntegralEstimate:
    """Estimate ``mu(B(c, r))`` for the plane distance."""
    if r <= 0:
        raise ValueError("radius must be positive")
    c = as_points(c)
    z1 = float(np.linalg.norm(c))
    if z1 == 0.0:
        pieces = [Piece(PolarChart(np.zeros(4), 0.0, r))]
    else:
        pieces = [Piece(DistBallChart(z1, r))]
    # mu is rotation invariant, so canonical coordinates suffice.
    return run_pieces(pieces, lambda Y: np.linalg.norm(Y, axis=1), spec).check(tol)


def _flux_density(Y, z1, C):
    R = kernels.r_terms(Y, z1)
    t1 = kernels.grad_d4(Y, z1)[:, 0]
    return (R["R21"] + R["R22"] + R["R23"] + 3.0 * t1) / np.linalg.norm(Y, axis=1)


def flux(z, eps: float, spec: QuadratureSpec = QuadratureSpec(), C: float = kernels.C_GAMMA,
         tol=None) -> IntegralEstimate:
    """Outward flux of the weighted gradient of Gamma through ``{d(., z) = eps}``.

    Evaluated in divergence form: ``-(3/4C) eps^-7`` times the integral over
    the ball of ``(sum_i T_i^2 d^4 + 3 T_1 d^4 + T_{4,y-z}^2 d^4) / |y|``.
    """
    z = as_points(z)
    z1 = float(np.linalg.norm(z))
    if z1 == 0.0:
        raise DegeneratePoint("the flux is taken around a non-characteristic pole")
    if eps <= 0:
        raise ValueError("eps must be positive")
    scale = -0.75 / C * eps**-7
    est = run_pieces([Piece(DistBallChart(z1, eps))], lambda Y: _flux_density(Y, z1, C), spec)
    return IntegralEstimate(scale * est.value, abs(scale) * est.error_indicator, est.samples_used).check(tol)


def compute_constant(spec: QuadratureSpec = QuadratureSpec(budget=10**7), tol=None) -> IntegralEstimate:
    """Cubature of ``21 * int (x1^2 + x2^2 + x4^2) dx`` over ``(x1^2+x2^2+x4^2)^2 + x3^2 <= 1``.

    The product rule uses spherical coordinates in ``(x1, x2, x4)`` with
    ``r = 1 - (1 - s)^2`` to smooth the square-root edge and
    ``x3 = t sqrt(1 - r^4)``.  Monte Carlo samples the unit 3-ball times
    ``[-1, 1]``.
    """
    threads = thread_count(spec)
    if spec.method is Method.MONTE_CARLO:
        nchunks = max(1, -(-spec.budget // MC_CHUNK))
        seqs = np.random.SeedSequence([spec.seed & 0xFFFFFFFFFFFFFFFF, 7]).spawn(nchunks)
        vol = 4.0 * math.pi / 3.0 * 2.0

        def run(k):
            n = min(MC_CHUNK, spec.budget - k * MC_CHUNK)
            rng = np.random.default_rng(seqs[k])
            v = rng.normal(size=(n, 3))
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            r = rng.random(n) ** (1.0 / 3.0)
            x3 = 2.0 * rng.random(n) - 1.0
            vals = 21.0 * vol * r**2 * (r**4 + x3**2 <= 1.0)
            return vals.sum(), (vals * vals).sum()

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(run, range(nchunks)))
        else:
            parts = [run(k) for k in range(nchunks)]
        s1 = sum(p[0] for p in parts)
        s2 = sum(p[1] for p in parts)
        n = spec.budget
        mean = s1 / n
        se = math.sqrt(max(s2 / n - mean * mean, 0.0) / max(n - 1, 1))
        return IntegralEstimate(mean, se, n).check(tol)

    def rule(m):
        (s, ws), (th, wth), (ph, wph), (t, wt) = [
            composite_gauss(m, lo, hi, spec.order)
            for lo, hi in ((0.0, 1.0), (0.0, math.pi), (0.0, 2 * math.pi), (-1.0, 1.0))]
        r = 1.0 - (1.0 - s) ** 2
        fr = 21.0 * r**4 * np.sqrt(1.0 - r**4) * 2.0 * (1.0 - s) * ws
        # The integrand does not depend on phi or t, but the rule is applied in full.
        total = 0.0
        for i in range(len(s)):
            block = fr[i] * np.einsum("a,b,c->abc", np.sin(th) * wth, wph, wt)
            total += float(block.sum())
        return total, len(s) * len(th) * len(ph) * len(t)

    m = cells_for_budget(spec.budget, spec.order)
    fine, n1 = rule(m)
    coarse, n2 = rule(max(1, m // 2))
    return IntegralEstimate(fine, abs(fine - coarse), n1 + n2).check(tol)


class WeakIdentity(enum.Enum):
    """Integral identities tested against pairs of compactly supported fields."""

    ADJOINT_Z1 = "aggiunti-Z1"
    ADJOINT_Z2 = "aggiunti-Z2"
    ADJOINT_Z3 = "aggiunti-Z3"
    ADJOINT_Z4 = "aggiunti-Z4"
    EXPANSION_DIRECT = "15ottobre-direct"
    EXPANSION_ADJOINT = "15ottobre-adjoint"

    @classmethod
    def parse(cls, v) -> "WeakIdentity":
        return v if isinstance(v, cls) else cls(str(v))


def _identity_terms(ident: WeakIdentity, Jf, Jg, Y, z, convention):
    """Columns ``[lhs, term_1, ...]`` of a Lebesgue-measure identity (rhs = sum of terms)."""
    from . import jets

    f, g = Jf.value, Jg.value
    r = np.linalg.norm(Y, axis=1)
    if ident.name.startswith("ADJOINT_Z"):
        i = int(ident.name[-1])
        Zf = jets.apply_T4_shifted(Jf, Y, z, "Z") if i == 4 else jets.apply_Z(i, Jf, Y)
        Zg = jets.apply_T4_shifted(Jg, Y, z, "Z") if i == 4 else jets.apply_Z(i, Jg, Y)
        cols = [Zf * g, -f * Zg]
        if i == 1:
            cols.append(-3.0 * f * g / r)
        if i == 4:
            s = {"derived": -1.0, "printed": 1.0}[convention]
            cols.append(s * jets._m4_pairing(Y, z) * f * g / r**3)
        return np.stack(cols, axis=1)
    z1 = float(z[0])
    y2, y3, y4 = Y[:, 1], Y[:, 2], Y[:, 3]
    ip = np.sum(Y * (Y - z), axis=1) / (2.0 * r)
    Z1g, Z2g, Z3g = (jets.apply_Z(k, Jg, Y) for k in (1, 2, 3))
    Z2f, Z3f = jets.apply_Z(2, Jf, Y), jets.apply_Z(3, Jf, Y)
    r2 = r * r
    terms = [y3 * z1 / r2 * f * Z1g, -1.5 * y2 * z1 / r2 * f * Z2g, 1.5 * y4 * z1 / r2 * f * Z3g,
             -y3 * z1 / (r2 * r) * f * g, -ip * Z3f * Z2g, ip * Z2f * Z3g]
    Z4f = jets.apply_T4_shifted(Jf, Y, z, "Z")
    if ident is WeakIdentity.EXPANSION_DIRECT:
        return np.stack([Z4f * g] + terms, axis=1)
    c = {"derived": 0.0, "printed": 2.0}[convention]
    s = {"derived": -1.0, "printed": 1.0}[convention]
    adj = -Z4f + s * jets._m4_pairing(Y, z) * f / (r2 * r)
    rhs = [-t for k, t in enumerate(terms) if k != 3] + [c * y3 * z1 / (r2 * r) * f * g]
    return np.stack([adj * g] + rhs, axis=1)


def _masked_jet(fld, Y):
    """Jet of ``fld`` with value and derivatives set to 0 outside its support ball."""
    from .jets import Jet2

    if getattr(fld, "support", None) is None:
        return fld.jet(Y)
    c, r = fld.support
    c = as_points(c)
    inside = np.sum((Y - c) ** 2, axis=1) < r * r
    J = fld.jet(np.where(inside[:, None], Y, c))
    return Jet2(np.where(inside, J.value, 0.0), np.where(inside[:, None], J.grad, 0.0),
                np.where(inside[:, None, None], J.hess, 0.0))


def weak_identity_residual(ident, f, g, z, spec: QuadratureSpec = QuadratureSpec(),
                           convention: str = "derived", tol=None) -> float:
    """``|LHS - RHS| / max(largest term, EPS_FLOOR)`` for one integral identity in ``dy``.

    ``f`` and ``g`` are jet fields with declared supports.  The expansion
    identities are stated for a pole ``z = (z1, 0, 0, 0)``; ``convention``
    picks the derived or printed zero-order coefficient of the shifted adjoint.
    """
    ident = WeakIdentity.parse(ident)
    if convention not in ("derived", "printed"):
        raise ValueError("convention must be 'derived' or 'printed'")
    z = as_points(z)
    if ident.name.startswith("EXPANSION") and np.any(z[1:]):
        raise ValueError("the expansion identities need z on the first axis")
    supports = [s for s in (getattr(f, "support", None), getattr(g, "support", None)) if s is not None]
    if not supports:
        raise ValueError("f or g must declare a compact support")
    c, rad = min(supports, key=lambda s: s[1])
    c = as_points(c)

    def integrand(Y):
        inside = np.sum((Y - c) ** 2, axis=1) < rad * rad
        Ys = np.where(inside[:, None], Y, c)
        cols = _identity_terms(ident, _masked_jet(f, Ys), _masked_jet(g, Ys), Ys, z, convention)
        # integrate_mu weights by |y|; the identities are in Lebesgue measure.
        return np.where(inside[:, None], cols / np.linalg.norm(Ys, axis=1)[:, None], 0.0)

    est = integrate_mu(integrand, [np.zeros(4)], spec, support=(c, rad))
    v = est.value
    resid = abs(v[0] - v[1:].sum())
    scale = max(float(np.max(np.abs(v))), EPS_FLOOR)
    IntegralEstimate(resid / scale, float(np.sum(est.error_indicator)) / scale, est.samples_used).check(tol)
    return float(resid / scale)
