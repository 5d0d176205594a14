"""Vectorized closed-form kernels for a pole on the first axis.

This is the reference implementation; ``_ckernels`` mirrors it in Cython.
Column layout of :func:`axis_kernels`::

    0 gamma, 1-4 Z_1..Z_3 Gamma and Z_{4,y-z} Gamma, 5 f_z, 6-8 K_1..K_3
"""
import numpy as np

N_KERNEL_COLS = 9
N_BUMP_COLS = 6


def axis_kernels(Y, z1, C):
    Y = np.asarray(Y, dtype=float)
    y1, y2, y3, y4 = Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3]
    D1 = y1 - z1
    n2 = D1 * D1 + y2 * y2 + y3 * y3 + y4 * y4
    ny2 = y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4
    ny = np.sqrt(ny2)
    s = y3 * y3 * z1 * z1
    d4 = n2 * n2 + 4.0 * s
    d = np.sqrt(np.sqrt(d4))
    dm7 = 1.0 / (d4 * d * d * d)
    dm11 = dm7 / d4
    t1 = 4.0 * n2 * n2 + 4.0 * n2 * z1 * D1 + 8.0 * s
    t2 = 4.0 * n2 * z1 * y4 - 8.0 * y2 * y3 * z1 * z1
    t3 = 4.0 * n2 * z1 * y2 + 8.0 * y4 * y3 * z1 * z1
    t4 = 8.0 * D1 * y3 * z1 * z1
    c = -0.75 / C
    out = np.empty((Y.shape[0], N_KERNEL_COLS))
    out[:, 0] = dm7 * d4 / C
    out[:, 1] = c * dm7 * t1 / ny
    out[:, 2] = c * dm7 * t2 / ny
    out[:, 3] = c * dm7 * t3 / ny
    F = c * dm7 * t4 / ny
    out[:, 4] = F
    R13 = 16.0 * (n2 * n2 + d4) * n2 * z1 * D1
    R23 = 4.0 * s + 36.0 * n2 * z1 * D1
    R33 = 12.0 * n2 * z1 * D1 + 24.0 * s + 8.0 * z1 * s * D1 / ny2
    out[:, 5] = 0.75 * dm11 / (C * ny2) * (-1.75 * R13 + d4 * R23 + d4 * R33 - 112.0 * s * s)
    pre = -6.0 * z1 * z1 / (C * ny2)
    Z2F = pre * (-1.75 * dm11 * t2 * D1 * y3 - dm7 * y4 * y3 - dm7 * D1 * y2)
    Z3F = pre * (-1.75 * dm11 * t3 * D1 * y3 - dm7 * y2 * y3 + dm7 * D1 * y4)
    ip = ny2 - y1 * z1
    out[:, 6] = -(y3 * z1 / ny2) * F
    out[:, 7] = 1.5 * y2 * z1 / ny2 * F + ip / (2.0 * ny) * Z3F
    out[:, 8] = -1.5 * y4 * z1 / ny2 * F - ip / (2.0 * ny) * Z2F
    return out


def bump_terms(Y, z1, C, center, radius, amplitude):
    """Per-node representation integrands, each already multiplied by |y|.

    Columns: sum_{i<=3} Z_i Gamma Z_i u, Z_{4,y-z} Gamma Z_{4,y-z} u, f_z u,
    sum_{i<=3} K_i Z_i u, u itself, and ``-2 y3 z1 |y|^-3 Z_{4,y-z} Gamma u``
    (the zero-order kernel of the printed representation).
    """
    Y = np.asarray(Y, dtype=float)
    k = axis_kernels(Y, z1, C)
    diff = Y - np.asarray(center, dtype=float)
    s = np.sum(diff * diff, axis=1) / (radius * radius)
    inside = s < 1.0
    q = np.where(inside, 1.0 - s, 1.0)
    u = np.where(inside, amplitude * np.exp(1.0 - 1.0 / q), 0.0)
    gfac = -2.0 * u / (radius * radius * q * q)
    g = gfac[:, None] * diff
    y1, y2, y3, y4 = Y[:, 0], Y[:, 1], Y[:, 2], Y[:, 3]
    g1, g2, g3, g4 = g[:, 0], g[:, 1], g[:, 2], g[:, 3]
    # T_i u; the |y| of the measure cancels the 1/|y| of Z_i.
    T1 = y1 * g1 + y2 * g2 + y3 * g3 + y4 * g4
    T2 = -y4 * g1 + y3 * g2 - y2 * g3 + y1 * g4
    T3 = -y2 * g1 + y1 * g2 + y4 * g3 - y3 * g4
    T4 = -y3 * g1 - y4 * g2 + (y1 - z1) * g3 + y2 * g4
    ny = np.sqrt(y1 * y1 + y2 * y2 + y3 * y3 + y4 * y4)
    out = np.empty((Y.shape[0], N_BUMP_COLS))
    out[:, 0] = k[:, 1] * T1 + k[:, 2] * T2 + k[:, 3] * T3
    out[:, 1] = k[:, 4] * T4
    out[:, 2] = k[:, 5] * u * ny
    out[:, 3] = k[:, 6] * T1 + k[:, 7] * T2 + k[:, 8] * T3
    out[:, 4] = u * ny
    out[:, 5] = -2.0 * y3 * z1 / (ny * ny) * k[:, 4] * u
    return out


def bump_sums(Y, W, z1, C, center, radius, amplitude):
    return np.asarray(W, dtype=float) @ bump_terms(Y, z1, C, center, radius, amplitude)
