import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from heisplane import jets, kernels
from heisplane.errors import DegeneratePoint, PoleHit
from heisplane.identities import gamma_field
from heisplane.kernels import (C_GAMMA, C_HR, canonicalize, f_z, gamma, grad_d4, grad_gamma,
                               kernel_bundle, kernels_K, r_terms, z4_second_derivatives)
from heisplane.plane_geom import N, frame_matrix, isometry_matrix, plane_dist

from conftest import rel

C = C_GAMMA
vec4 = arrays(np.float64, 4, elements=st.floats(-3, 3, allow_nan=False))


def test_constants():
    assert C_HR == pytest.approx(65.898, rel=1e-4)
    assert C_GAMMA == C_HR / 2


def test_gamma_examples(rng):
    assert gamma([2.0, 0, 0, 0], N) == pytest.approx(1 / C, rel=1e-15)
    y, z = rng.normal(size=(2, 500, 4))
    lam = 2.5
    vals = np.array([gamma(y[i], z[i]) for i in range(50)])
    scaled = np.array([gamma(lam * y[i], lam * z[i]) for i in range(50)])
    assert rel(scaled, lam**-3 * vals) < 1e-12
    with pytest.raises(PoleHit):
        gamma(N, N)


def test_gamma_rotation_invariance(rng):
    x = rng.normal(size=4)
    x /= np.linalg.norm(x)
    y = rng.normal(size=(200, 4))
    z = rng.normal(size=4)
    R = isometry_matrix(x)
    assert rel(gamma(y @ R.T, R @ z), gamma(y, z)) < 1e-12
    A = frame_matrix(x)
    assert rel(gamma(y @ A.T, A @ z), gamma(y, z)) > 1e-3


def test_grad_d4_examples(rng):
    np.testing.assert_allclose(grad_d4([1.0, 1, 0, 0], 1.0), [4, 0, 4, 0])
    y = rng.normal(size=(100, 4))
    g = grad_d4(y, 0.0)
    np.testing.assert_allclose(g[:, 0], 4 * np.sum(y * y, axis=1) ** 2, rtol=1e-14)
    assert np.all(g[:, 1:] == 0)


def test_grad_d4_vs_jets(rng):
    from heisplane.identities import d4_field
    y = rng.normal(size=(1000, 4))
    z1 = rng.uniform(0.1, 3.0, 1000)
    worst = 0.0
    for i in range(1000):
        z = np.array([z1[i], 0, 0, 0])
        J = d4_field(z).jet(y[i:i + 1])
        ref = [jets.apply_T(k, J, y[i:i + 1])[0] for k in (1, 2, 3)] + [jets.apply_T4_shifted(J, y[i:i + 1], z)[0]]
        got = grad_d4(y[i], z1[i])
        worst = max(worst, np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
    assert worst < 1e-10


def test_grad_gamma_examples(rng):
    s = 3 / (np.sqrt(2) * C)
    np.testing.assert_allclose(grad_gamma([1.0, 1, 0, 0], 1.0), [-s, 0, -s, 0], atol=1e-16)
    y = rng.normal(size=(50, 4))
    g = grad_gamma(y, 0.0)
    np.testing.assert_allclose(g[:, 0], -3 / (C * np.sum(y * y, axis=1) ** 2), rtol=1e-12)
    np.testing.assert_allclose(g[:, 1:], 0, atol=1e-300)
    y[:, 2] = 0
    assert np.all(grad_gamma(y, 0.7)[:, 3] == 0)
    assert grad_gamma([0.7, 0.3, 1.0, -0.2], 0.7)[3] == 0
    with pytest.raises(DegeneratePoint):
        grad_gamma(np.zeros(4), 1.0)


def test_r_terms_examples():
    R = r_terms([1.0, 1, 0, 0], 1.0)
    assert (R["R11"], R["R12"], R["R13"]) == (16, 16, 0)
    assert (R["R21"], R["R22"], R["R23"]) == (28, 16, 0)
    t = grad_d4([1.0, 1, 0, 0], 1.0)
    assert np.sum(t**2) == 32
    with pytest.raises(ValueError):
        r_terms([1.0, 1, 0, 0], 1.0, "other")
    with pytest.raises(DegeneratePoint):
        r_terms(np.zeros(4), 1.0)


def test_r_term_bounds(rng):
    y = rng.normal(size=(10_000, 4)) * 10 ** rng.uniform(-1, 1, (10_000, 1))
    z1 = 10 ** rng.uniform(-1, 1, 10_000)
    R = r_terms(y, z1)
    d = plane_dist(y, np.stack([z1, 0 * z1, 0 * z1, 0 * z1], axis=1))
    ny = np.linalg.norm(y, axis=1)
    # The sharp constant for R13 is 32: on the axis beyond the pole R13 = 32 |z| d^7.
    assert np.all(np.abs(R["R13"]) <= 32 * z1 * d**7 * (1 + 1e-12))
    t = 0.37
    edge = r_terms([1.0 + t, 0, 0, 0], 1.0)["R13"]
    assert edge == pytest.approx(32 * t**7, rel=1e-12) and edge > 16 * t**7
    assert np.all(np.abs(R["R23"]) <= 36 * (z1 + np.sqrt(ny * z1)) * d**3 * (1 + 1e-12))


def test_f_z_examples(rng):
    assert f_z([1.0, 1, 0, 0], N) == 0
    # Derived R33 at this point is 12 against the printed 4.
    assert f_z([2.0, 0, 0, 0], N) == pytest.approx(-1.5 / C, rel=1e-14)
    assert f_z([2.0, 0, 0, 0], N, convention="printed") == pytest.approx(-3 / C, rel=1e-14)
    y = rng.normal(size=(50, 4))
    assert np.all(f_z(y, np.zeros(4)) == 0)


def test_f_z_is_the_jet_laplacian(rng):
    for _ in range(200):
        y = rng.normal(size=(1, 4))
        z = rng.normal(size=4)
        lap = jets.laplacian_z(gamma_field(z), y, z)[0]
        assert f_z(y[0], z) == pytest.approx(lap, rel=1e-8, abs=1e-10 * abs(gamma(y[0], z)))


def test_printed_f_z_is_not_the_laplacian():
    y, z = np.array([[1.3, 0.4, 0.7, -0.2]]), np.array([0.8, 0, 0, 0])
    J = gamma_field(z).jet(y)
    printed = f_z(y[0], z, convention="printed")
    for conv in ("derived", "printed"):
        assert abs(printed - jets.laplacian_z(J, y, z, conv)[0]) > 1e-3 * abs(printed)


def test_kernels_examples(rng):
    np.testing.assert_array_equal(kernels_K([2.0, 0, 0, 0], N, convention="printed"), 0)
    np.testing.assert_array_equal(kernels_K([2.0, 0, 0, 0], N), 0)
    k1 = -6 / (C * 5**1.5 * 8**1.75)
    assert kernels_K([2.0, 0, 1, 0], N, convention="printed")[1] == pytest.approx(k1, rel=1e-14)
    assert kernels_K([2.0, 0, 1, 0], N)[1] == pytest.approx(-k1, rel=1e-14)
    y = rng.normal(size=(200, 4))
    z = np.array([0.9, 0, 0, 0])
    kp = kernels_K(y, z, convention="printed")
    np.testing.assert_allclose(kp[:, 0] * np.linalg.norm(y, axis=1), -2 * kp[:, 1], rtol=1e-13)
    assert np.all(kernels_K(y, z)[:, 0] == 0)
    assert np.all(kernels_K(y, np.zeros(4)) == 0)
    with pytest.raises(ValueError):
        kernels_K(y, z, convention="x")


def test_z4_second_derivatives_vs_jets(rng):
    y = rng.normal(size=(300, 4))
    z1 = 1.3
    z = np.array([z1, 0, 0, 0])

    def F(*v):
        G = gamma_field(z)
        J = G.fn(*v)
        return J

    # Z_{4,y-z} Gamma as a field, differentiated by jets.
    def z4g(y1, y2, y3, y4):
        e1 = y1 - z1
        r2 = e1 * e1 + y2 * y2 + y3 * y3 + y4 * y4
        d4 = r2 * r2 + 4.0 * (y3 * z1) * (y3 * z1)
        return d4 ** -1.75 * e1 * y3 * (-6 * z1 * z1 / C) / jets.sqrt(y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4)

    J = jets.field(z4g).jet(y)
    closed = z4_second_derivatives(y, z1)
    assert rel(closed[:, 0], jets.apply_Z(2, J, y)) < 1e-10
    assert rel(closed[:, 1], jets.apply_Z(3, J, y)) < 1e-10
    assert rel(grad_gamma(y, z1)[:, 3], J.value) < 1e-12


def test_canonicalize_examples(rng):
    cp = canonicalize([3.0, 0, 0, 0])
    np.testing.assert_array_equal(cp.rotation, np.eye(4))
    assert cp.z1 == 3.0
    z, y = rng.normal(size=(2, 4))
    cp = canonicalize(z, y)
    np.testing.assert_allclose(cp.rotation @ [cp.z1, 0, 0, 0], z, atol=1e-14)
    assert np.linalg.norm(cp.y_rot) == pytest.approx(np.linalg.norm(y), rel=1e-14)
    np.testing.assert_allclose(cp.from_axis(cp.to_axis(y)), y, atol=1e-14)
    with pytest.raises(DegeneratePoint):
        canonicalize(np.zeros(4))


@given(vec4.filter(lambda v: np.linalg.norm(v) > 0.1), st.floats(0.1, 3))
def test_axis_pole_needs_no_rotation(y, z1):
    z = np.array([z1, 0, 0, 0])
    if plane_dist(y, z) < 1e-3:
        return
    cp = canonicalize(z)
    yr = cp.to_axis(y)
    assert f_z(y, z) == pytest.approx(f_z(yr, z), rel=1e-12, abs=1e-300)
    np.testing.assert_allclose(kernels_K(y, z), kernels_K(yr, z), rtol=1e-12, atol=1e-300)


def test_general_pole_covariance(rng):
    # Rotating both y and z by an isometry leaves f and K unchanged.
    y = rng.normal(size=(200, 4))
    z = rng.normal(size=4)
    x = rng.normal(size=4)
    R = isometry_matrix(x / np.linalg.norm(x))
    assert rel(f_z(y @ R.T, R @ z), f_z(y, z)) < 1e-10
    assert rel(kernels_K(y @ R.T, R @ z), kernels_K(y, z)) < 1e-10


def test_f_z_continuity_at_origin(rng):
    y = rng.normal(size=(20, 4))
    vals = [np.max(np.abs(f_z(y, [t, 0, 0, 0]))) for t in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(b < a for a, b in zip(vals, vals[1:])) and vals[-1] < 1e-3 * vals[0]


def test_bound_examples():
    b = kernels.bound_values([2.0, 0, 0, 0], N)
    assert b["f"] == pytest.approx((np.sqrt(2) + 1) / (4 * C), rel=1e-14)
    # |f| = 1.5/C exceeds the stated right-hand side (ratio about 2.49).
    assert abs(f_z([2.0, 0, 0, 0], N)) / b["f"] == pytest.approx(6 / (np.sqrt(2) + 1), rel=1e-12)
    y = np.array([1.5, 0.3, 0.0, -0.4])
    assert abs(grad_gamma(y, 1.0)[3]) <= kernels.bound_values(y, N)["zgamma_4"]


def test_kernel_bundle_shapes(rng):
    y = rng.normal(size=(10, 4))
    kb = kernel_bundle(y, np.array([0.3, -1.0, 0.2, 0.5]))
    assert kb.grad_gamma.shape == (10, 4) and kb.k.shape == (10, 4) and kb.f_z.shape == (10,)
    assert np.all(np.isfinite(kb.gamma)) and set(kb.bounds) >= {"zgamma_i", "f", "k_shape"}
    one = kernel_bundle(y[0], N)
    assert np.ndim(one.gamma) == 0 and one.k.shape == (4,)
