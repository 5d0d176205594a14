import numpy as np
import pytest

from heisplane import jets
from heisplane.errors import BudgetExhausted
from heisplane.plane_geom import N, isometry_matrix
from heisplane.quadrature import QuadratureSpec
from heisplane.reconstruct import BumpFunction, limit_study, reconstruct, solfond_check

SPEC = QuadratureSpec(budget=1 << 18)
U = BumpFunction([2.0, 0, 0, 0], 1.0, 1.0)


def test_bump_values(rng):
    u = BumpFunction([1.0, 2, 0, -1], 0.5, 3.0)
    assert u(u.center) == pytest.approx(3.0)
    assert u(u.center + [0.5, 0, 0, 0]) == 0.0 and u(u.center + [2, 0, 0, 0]) == 0.0
    assert u.sup_norm == 3.0 and u.support[1] == 0.5
    y = u.center + 0.2 * rng.uniform(-1, 1, size=(100, 4))
    np.testing.assert_allclose(u.field()(y), u(y), rtol=1e-13)
    with pytest.raises(ValueError):
        BumpFunction(N, 0.0)


def test_bump_rotation(rng):
    R = isometry_matrix(rng.normal(size=4) / 2.0)
    R /= np.linalg.norm(R[:, 0])
    y = rng.normal(size=(50, 4)) * 0.3 + U.center @ R
    np.testing.assert_allclose(U.rotated(R)(y), U(y @ R.T), rtol=1e-12, atol=1e-300)


def test_bump_jet_matches_finite_differences():
    f = U.field()
    y = np.array([[2.2, 0.3, -0.1, 0.2]])
    J = f.jet(y)
    h = 1e-6
    g = [(f(y + h * e) - f(y - h * e))[0] / (2 * h) for e in np.eye(4)]
    np.testing.assert_allclose(J.grad[0], g, rtol=1e-6)


def test_center_configuration():
    rep = reconstruct(U, [2.0, 0, 0, 0], SPEC)
    assert rep.target == 1.0
    assert rep.error <= 0.02 * U.sup_norm
    assert rep.reconstructed == pytest.approx(rep.term_gradient + rep.term_zero_order, rel=1e-15)
    assert rep.as_dict()["spec"]["budget"] == SPEC.budget


def test_far_outside_tends_to_zero():
    errs = [reconstruct(U, [5.5, 0, 0, 0], QuadratureSpec(budget=b)).error for b in (1 << 12, 1 << 20)]
    assert errs[1] < 1e-3 and errs[1] < errs[0] / 10


def test_zero_pole_is_gradient_only():
    rep = reconstruct(U, np.zeros(4), SPEC)
    assert rep.term_zero_order == 0.0
    assert rep.reconstructed == rep.term_gradient
    assert abs(rep.reconstructed) < 1e-6


def test_rotation_covariance():
    z = np.array([0.8, 1.1, -0.4, 0.9])
    r = np.linalg.norm(z)
    R = isometry_matrix(z / r)
    u = BumpFunction(R @ np.array([r + 0.2, 0.1, 0.0, -0.1]), 1.0)
    a = reconstruct(u, z, SPEC)
    b = reconstruct(u.rotated(R), r * N, SPEC)
    assert abs(a.reconstructed - b.reconstructed) <= a.error_indicator + b.error_indicator + 1e-12
    assert a.target == pytest.approx(b.target, rel=1e-12)


def test_solfond():
    z = [2.0, 0, 0, 0]
    res = solfond_check(U, z, SPEC)
    assert res <= 0.02
    rep = reconstruct(U, z, SPEC)
    assert abs(rep.weak_form - rep.reconstructed) <= 2 * rep.error_indicator + 1e-3
    assert solfond_check(BumpFunction(U.center, 1.0, 0.0), z, SPEC) == 0.0
    assert solfond_check(U, z, SPEC, convention="printed") > 1.5
    with pytest.raises(ValueError):
        solfond_check(U, np.zeros(4), SPEC)
    with pytest.raises(ValueError):
        solfond_check(U, z, SPEC, convention="x")


def test_budget_tolerance():
    with pytest.raises(BudgetExhausted):
        reconstruct(U, [2.3, 0.2, 0.3, -0.1], QuadratureSpec(budget=1 << 12), tol=1e-9)


def test_limit_study():
    seq = [[2.0**-k, 0, 0, 0] for k in range(1, 7)]
    recs = limit_study(U, seq, SPEC)
    f = [abs(r.f_integral) for r in recs]
    k0 = [abs(r.k0_printed_integral) for r in recs]
    assert all(b < a for a, b in zip(f, f[1:])) and all(b < a for a, b in zip(k0, k0[1:]))
    assert all(r.k0_integral == 0.0 for r in recs)
    # Z_{4,y} Gamma(y, 0) vanishes identically, so both weighted targets are 0.
    assert recs[0].target_proof_weight == 0.0 and recs[0].target_statement_weight == 0.0
    assert abs(recs[-1].k_sum) < abs(recs[0].k_sum)
    with pytest.raises(ValueError):
        limit_study(U, [np.zeros(4)], SPEC)


def test_far_side_terms_small():
    seq = [[-(2.0**-k), 0, 0, 0] for k in range(1, 5)]
    for r in limit_study(U, seq, SPEC):
        assert max(abs(r.f_integral), abs(r.k_sum), abs(r.k0_printed_integral)) < 0.02
