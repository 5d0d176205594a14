"""Exact symbolic checks of the polynomial identities behind the kernels."""
import sympy as sp

y1, y2, y3, y4, z1 = sp.symbols("y1 y2 y3 y4 z1", real=True)
Y = (y1, y2, y3, y4)
D1 = y1 - z1
n2 = D1**2 + y2**2 + y3**2 + y4**2
ny2 = y1**2 + y2**2 + y3**2 + y4**2
d4 = n2**2 + 4 * y3**2 * z1**2

# Coefficient vectors: T1 Euler field, T2 and T3 from the frame, T4 shifted by z.
COEF = {
    1: (y1, y2, y3, y4),
    2: (-y4, y3, -y2, y1),
    3: (-y2, y1, y4, -y3),
    4: (-y3, -y4, D1, y2),
}


def T(i, f):
    return sum(c * sp.diff(f, v) for c, v in zip(COEF[i], Y))


def test_gradient_decomposition():
    lhs = sum(T(i, d4) ** 2 for i in (1, 2, 3, 4))
    R11 = 16 * d4 * z1**2 * (D1**2 + y4**2 + y2**2)
    R12 = 4 * (n2**2 + d4) ** 2
    R13 = 16 * (n2**2 + d4) * n2 * z1 * D1
    assert sp.expand(lhs - (R11 + R12 + R13)) == 0


def test_second_order_decomposition():
    lhs = sum(T(i, T(i, d4)) for i in (1, 2, 3, 4))
    rhs = 28 * z1**2 * (y2**2 + y4**2 + D1**2) + 16 * n2**2 + 4 * y3**2 * z1**2 + 36 * n2 * z1 * D1
    assert sp.expand(lhs - rhs) == 0


def test_cancellation_and_collapse():
    R11 = 16 * d4 * z1**2 * (D1**2 + y4**2 + y2**2)
    R21 = 28 * z1**2 * (y2**2 + y4**2 + D1**2)
    assert sp.expand(-sp.Rational(7, 4) * R11 + d4 * R21) == 0
    R12 = 4 * (n2**2 + d4) ** 2
    lhs = -sp.Rational(7, 4) * R12 + d4 * 16 * n2**2 + d4 * 12 * n2**2
    assert sp.expand(lhs + 112 * y3**4 * z1**4) == 0


def test_defect_closed_form_matches_laplacian():
    # f = Delta_z d^-3 with the divergence-form first-order term.
    C = sp.Symbol("C", positive=True)
    gamma = d4 ** sp.Rational(-3, 4) / C
    lap = (-(sum(T(i, T(i, gamma)) for i in (1, 2, 3, 4)) + 3 * T(1, gamma)) / ny2
           - y3 * z1 * T(4, gamma) / ny2**2)
    R13 = 16 * (n2**2 + d4) * n2 * z1 * D1
    R23 = 4 * y3**2 * z1**2 + 36 * n2 * z1 * D1
    R33 = 12 * n2 * z1 * D1 + 24 * y3**2 * z1**2 + 8 * z1**3 * y3**2 * D1 / ny2
    closed = (3 * d4 ** sp.Rational(-11, 4) / (4 * C * ny2)
              * (-sp.Rational(7, 4) * R13 + d4 * R23 + d4 * R33 - 112 * y3**4 * z1**4))
    point = {y1: sp.Rational(13, 10), y2: sp.Rational(2, 5), y3: sp.Rational(7, 10),
             y4: -sp.Rational(1, 5), z1: sp.Rational(4, 5), C: 1}
    assert abs(sp.N((lap - closed).subs(point), 30)) < sp.Float("1e-25")


def test_constant_reduction():
    r = sp.Symbol("r", positive=True)
    integral = 8 * sp.pi * sp.Integral(r**4 * sp.sqrt(1 - r**4), (r, 0, 1))
    beta = 2 * sp.pi * sp.gamma(sp.Rational(5, 4)) * sp.gamma(sp.Rational(3, 2)) / sp.gamma(sp.Rational(11, 4))
    assert abs(sp.N(integral - beta, 30)) < sp.Float("1e-25")
