"""Torus coordinates on ``A``.

On the overlap the new coordinates are the two-centre bipolar distances to
(-1, 0) and (1, 0).  Off the overlap the angular coordinate ``psi`` is
extended piecewise (linearly in the inner part, affinely towards ``pi`` in
the outer part) so that ``Psi(r, theta) = (r, psi(r, theta))`` is a
homeomorphism of ``I x S^1`` with ``I = [r0, r1]``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .geometry import (
    BOUNDARY_TOL,
    DEFAULT_PAIR,
    AnnulusPair,
    PlanePoint,
    centre_distances,
    m_minus,
    m_minus_inv,
    m_plus,
    m_plus_inv,
    region_boundaries,
    wrap_angle,
)

PI = math.pi


class TorusPoint(NamedTuple):
    x: np.ndarray | float
    y: np.ndarray | float


def _as_out(a):
    return float(a) if np.ndim(a) == 0 else a


def _radius(r, ann):
    r = np.asarray(r, dtype=float)
    if not np.all(ann.contains_radius(r, BOUNDARY_TOL)):
        raise DomainError("radial coordinate outside I = [r0, r1]")
    return np.clip(r, ann.r0, ann.r1)


def psi(r, theta, ann: AnnulusPair = DEFAULT_PAIR):
    """Angular part of the coordinate change, odd in ``theta``."""
    r = _radius(r, ann)
    theta = np.asarray(theta, dtype=float)
    s = np.where(theta < 0.0, -1.0, 1.0)
    t = np.abs(theta)
    ti, to = region_boundaries(r, ann)
    inner = ann.r0 * t / ti
    middle = np.sqrt(np.maximum(r * r - 4.0 * r * np.cos(t) + 4.0, 0.0))
    outer = ann.r1 + (PI - ann.r1) * (t - to) / (PI - to)
    val = np.where(t < ti, inner, np.where(t <= to, middle, outer))
    return _as_out(s * val)


def psi_inv(x, y, ann: AnnulusPair = DEFAULT_PAIR):
    """Inverse of ``psi(x, .)``: the polar angle whose ``psi`` value is ``y``."""
    x = _radius(x, ann)
    y = np.asarray(y, dtype=float)
    s = np.where(y < 0.0, -1.0, 1.0)
    a = np.abs(y)
    ti, to = region_boundaries(x, ann)
    inner = a * ti / ann.r0
    middle = np.arccos(np.clip((x * x + 4.0 - a * a) / (4.0 * x), -1.0, 1.0))
    outer = to + (a - ann.r1) * (PI - to) / (PI - ann.r1)
    val = np.where(a < ann.r0, inner, np.where(a <= ann.r1, middle, outer))
    return _as_out(s * val)


def big_psi(r, theta, ann: AnnulusPair = DEFAULT_PAIR) -> TorusPoint:
    return TorusPoint(_as_out(_radius(r, ann)), psi(r, theta, ann))


def big_psi_inv(x, y, ann: AnnulusPair = DEFAULT_PAIR):
    return _as_out(_radius(x, ann)), psi_inv(x, y, ann)


def iota(x, y, inverse: bool = False) -> TorusPoint:
    """Quarter turn ``(x, y) -> (-y, x)``; the inverse is ``(x, y) -> (y, -x)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if inverse:
        return TorusPoint(_as_out(wrap_angle(y)), _as_out(wrap_angle(-x)))
    return TorusPoint(_as_out(wrap_angle(-y)), _as_out(wrap_angle(x)))


def in_interval(a, ann: AnnulusPair = DEFAULT_PAIR, tol: float = 0.0):
    """Mask of ``a`` in ``I`` (widened by ``tol``)."""
    return ann.contains_radius(a, tol)


def in_R(x, y, ann: AnnulusPair = DEFAULT_PAIR, tol: float = BOUNDARY_TOL):
    """Membership in ``R = (I x S^1) u ((S^1 x I) minus (-I x I))``.

    ``-I x I`` is the discarded second copy of ``Sigma-``; ``Sigma-`` lives
    at ``I x -I`` in ``R``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return in_interval(x, ann, tol) | (in_interval(y, ann, tol) & ~in_interval(-x, ann))


def in_R_prime(x, y, ann: AnnulusPair = DEFAULT_PAIR, tol: float = BOUNDARY_TOL):
    """Membership in ``R' = (S^1 x I) u ((I x S^1) minus (I x -I))``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return in_interval(y, ann, tol) | (in_interval(x, ann, tol) & ~in_interval(-y, ann))


def in_S(x, y, ann: AnnulusPair = DEFAULT_PAIR, tol: float = 0.0):
    """Membership in ``S = (I x I) u (I x -I)``, the image of the overlap."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return in_interval(x, ann, tol) & in_interval(np.abs(y), ann, tol)


def to_torus(u, v, ann: AnnulusPair = DEFAULT_PAIR) -> TorusPoint:
    """Plane point of ``A`` to its representative in ``R``.

    ``A+`` (including both overlaps) uses ``Psi o M+^-1``; the rest of
    ``A-`` uses ``iota o Psi o M-^-1``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    dp, dm = centre_distances(u, v)
    in_p = ann.contains_radius(dp, BOUNDARY_TOL)
    in_m = ann.contains_radius(dm, BOUNDARY_TOL) & ~in_p
    if not np.all(in_p | in_m):
        raise DomainError("point outside A")
    x = np.empty(u.shape)
    y = np.empty(u.shape)
    if np.any(in_p):
        r, th = m_plus_inv(u[in_p], v[in_p])
        x[in_p], y[in_p] = _radius(r, ann), psi(r, th, ann)
    if np.any(in_m):
        r, th = m_minus_inv(u[in_m], v[in_m])
        x[in_m], y[in_m] = iota(_radius(r, ann), psi(r, th, ann))
    return TorusPoint(_as_out(wrap_angle(x)), _as_out(wrap_angle(y)))


def from_torus(x, y, ann: AnnulusPair = DEFAULT_PAIR) -> PlanePoint:
    """Inverse of :func:`to_torus` on ``R``.

    Uses the ``A+`` chart when ``x`` is in ``I`` and the rotated ``A-``
    chart otherwise.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    plus = in_interval(x, ann, BOUNDARY_TOL)
    minus = ~plus & in_interval(y, ann, BOUNDARY_TOL) & ~in_interval(-x, ann)
    if not np.all(plus | minus):
        raise DomainError("torus point not in R")
    u = np.empty(x.shape)
    v = np.empty(x.shape)
    if np.any(plus):
        xp = x[plus]
        u[plus], v[plus] = m_plus(_radius(xp, ann), psi_inv(xp, y[plus], ann))
    if np.any(minus):
        r = y[minus]
        u[minus], v[minus] = m_minus(_radius(r, ann), psi_inv(r, wrap_angle(-x[minus]), ann))
    return PlanePoint(_as_out(u), _as_out(v))


def omega(x, y, inverse: bool = False, ann: AnnulusPair = DEFAULT_PAIR) -> TorusPoint:
    """Switch map between the two annulus charts on the torus.

    Forward: ``iota`` on ``I x -I`` and ``iota^-1`` elsewhere.
    Inverse: ``iota^-1`` on ``I x I`` and ``iota`` elsewhere.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    if inverse:
        use_iota = ~(in_interval(x, ann) & in_interval(y, ann))
    else:
        use_iota = in_interval(x, ann) & in_interval(-y, ann)
    fx, fy = iota(x, y)
    bx, by = iota(x, y, inverse=True)
    return TorusPoint(_as_out(np.where(use_iota, fx, bx)), _as_out(np.where(use_iota, fy, by)))


def omega_jacobian(x, y, inverse: bool = False, ann: AnnulusPair = DEFAULT_PAIR):
    """Sign ``+1`` where :func:`omega` applies ``iota`` and ``-1`` where it applies ``iota^-1``.

    ``D iota = [[0, -1], [1, 0]]`` and ``D iota^-1`` is its negative.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if inverse:
        use_iota = ~(in_interval(x, ann) & in_interval(y, ann))
    else:
        use_iota = in_interval(x, ann) & in_interval(-y, ann)
    return np.where(use_iota, 1.0, -1.0)
