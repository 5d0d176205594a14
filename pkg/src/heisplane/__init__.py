"""Numerical toolkit for the plane {x5 = 0} in the Heisenberg group H^2.

Modules: ``heis_core`` (group law, gauge norm), ``plane_geom`` (plane
distance, frames, regimes), ``jets`` (second-order forward derivatives),
``kernels`` (fundamental solution and its kernels), ``quadrature``
(integration against ``|y| dy``), ``reconstruct`` (representation formula)
and ``cli``.
"""
from . import _backend
from .errors import BudgetExhausted, DegeneratePoint, HeisPlaneError, PoleHit
from .heis_core import HPoint, dilate, embed_plane, gauge_dist, gauge_norm, group_mul, inverse
from .kernels import C_GAMMA, C_HR, f_z, gamma, grad_gamma, kernels_K, kernel_bundle
from .plane_geom import (N, PlanePoint, Regime, ball_contains, frame_matrix, isometry_matrix,
                         plane_dist, plane_dist4, regime_classify, rotation_matrix)
from .quadrature import (IntegralEstimate, Method, QuadratureSpec, compute_constant, flux,
                         integrate_mu, mu_ball, weak_identity_residual)
from .reconstruct import BumpFunction, ReconstructionReport, limit_study, reconstruct, solfond_check

BACKEND = _backend.NAME
__version__ = "0.1.0"
