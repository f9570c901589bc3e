"""Derivatives of the coordinate change, Jacobians of ``F`` and ``H``, and
the tangent cones

    C  = {(b1, b2): b1 * b2 >= 0}
    C~ = {(b1, b2): b1 * b2 <= 0}.

Derivative routines refuse points within :data:`SEAM_TOL` of a seam, where
the coordinates are only piecewise smooth.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple

import numpy as np

from .bipolar import in_interval, omega, omega_jacobian, psi, psi_inv
from .errors import SeamDerivative
from .geometry import (
    BOUNDARY_TOL,
    DEFAULT_PAIR,
    AnnulusPair,
    boundary_angle_derivatives,
    region_boundaries,
    wrap_angle,
)

PI = math.pi
SEAM_TOL = 1e-12
#: ``|b1 b2| < CONE_TOL * |w|^2`` counts as the common boundary of both cones.
CONE_TOL = 1e-14


class TangentVec(NamedTuple):
    b1: np.ndarray | float
    b2: np.ndarray | float


class Jac2(NamedTuple):
    a11: np.ndarray | float
    a12: np.ndarray | float
    a21: np.ndarray | float
    a22: np.ndarray | float

    def __matmul__(self, other):
        if isinstance(other, Jac2):
            return Jac2(
                self.a11 * other.a11 + self.a12 * other.a21,
                self.a11 * other.a12 + self.a12 * other.a22,
                self.a21 * other.a11 + self.a22 * other.a21,
                self.a21 * other.a12 + self.a22 * other.a22,
            )
        b1, b2 = other
        return TangentVec(self.a11 * b1 + self.a12 * b2, self.a21 * b1 + self.a22 * b2)

    def det(self):
        return self.a11 * self.a22 - self.a12 * self.a21

    def as_array(self):
        """Stack into shape ``(..., 2, 2)``."""
        return np.stack(
            [np.stack([np.asarray(self.a11), np.asarray(self.a12)], -1),
             np.stack([np.asarray(self.a21), np.asarray(self.a22)], -1)], -2)


class ConeId(Enum):
    C = "C"
    CTilde = "C~"


def _psi_partials(r, theta, ann):
    """Unchecked ``(d psi/dr, d psi/dtheta, distance to nearest seam)``."""
    s = np.where(theta < 0.0, -1.0, 1.0)
    t = np.abs(theta)
    ti, to = region_boundaries(r, ann)
    dti, dto = boundary_angle_derivatives(r, ann)
    rho = np.sqrt(np.maximum(r * r - 4.0 * r * np.cos(t) + 4.0, 1e-300))
    k = PI - ann.r1
    d1 = np.where(
        t < ti,
        -ann.r0 * t * dti / (ti * ti),
        np.where(t <= to, (r - 2.0 * np.cos(t)) / rho, -k * (PI - t) * dto / (PI - to) ** 2),
    )
    d2 = np.where(t < ti, ann.r0 / ti, np.where(t <= to, 2.0 * r * np.sin(t) / rho, k / (PI - to)))
    seam = np.minimum(np.abs(t - ti), np.abs(t - to))
    return s * d1, d2, seam


def _psi_inv_partials(x, y, ann):
    s = np.where(y < 0.0, -1.0, 1.0)
    a = np.abs(y)
    ti, to = region_boundaries(x, ann)
    dti, dto = boundary_angle_derivatives(x, ann)
    q = np.clip((x * x + 4.0 - a * a) / (4.0 * x), -1.0, 1.0)
    root = np.sqrt(np.maximum(1.0 - q * q, 1e-300))
    qx = (x * x - 4.0 + a * a) / (4.0 * x * x)
    k = PI - ann.r1
    d1 = np.where(
        a < ann.r0,
        a * dti / ann.r0,
        np.where(a <= ann.r1, -qx / root, dto * (PI - a) / k),
    )
    d2 = np.where(a < ann.r0, ti / ann.r0, np.where(a <= ann.r1, a / (2.0 * x * root), (PI - to) / k))
    seam = np.minimum(np.abs(a - ann.r0), np.abs(a - ann.r1))
    return s * d1, d2, seam


def _check_seam(seam, what, stage=None):
    if np.any(seam < SEAM_TOL):
        raise SeamDerivative(f"{what} requested within {SEAM_TOL:g} of a seam", stage=stage)


def d_psi(r, theta, ann: AnnulusPair = DEFAULT_PAIR):
    """Partial derivatives ``(D1 psi, D2 psi)`` with respect to ``r`` and ``theta``."""
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    d1, d2, seam = _psi_partials(r, theta, ann)
    _check_seam(seam, "d_psi")
    return _o(d1), _o(d2)


def d_psi_inv(x, y, ann: AnnulusPair = DEFAULT_PAIR):
    """Partial derivatives of ``psi^-1(x, y)``, from the closed-form inverse branches."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d1, d2, seam = _psi_inv_partials(x, y, ann)
    _check_seam(seam, "d_psi_inv")
    return _o(d1), _o(d2)


def _o(a):
    return float(a) if np.ndim(a) == 0 else a


def _f_with_jacobian(x, y, ann, inverse):
    """``F^{+-1}`` together with ``(D1 f, D2 f)`` and the seam distance.

    Off ``I x S^1`` the map is the identity, so ``D1 f = 0`` and ``D2 f = 1``.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    act = in_interval(x, ann, BOUNDARY_TOL)
    ny = np.array(y, dtype=float, copy=True)
    a21 = np.zeros(x.shape)
    a22 = np.ones(x.shape)
    seam = np.array(np.minimum(np.abs(x - ann.r0), np.abs(x - ann.r1)))
    if np.any(act):
        xa = np.clip(x[act], ann.r0, ann.r1)
        ya = y[act]
        sign = -1.0 if inverse else 1.0
        yt = wrap_angle(psi_inv(xa, ya, ann) + sign * ann.c * (xa - ann.r0))
        ny[act] = wrap_angle(psi(xa, yt, ann))
        p1, p2, s_out = _psi_partials(xa, yt, ann)
        q1, q2, s_in = _psi_inv_partials(xa, ya, ann)
        a21[act] = p1 + p2 * (q1 + sign * ann.c)
        a22[act] = p2 * q2
        seam[act] = np.minimum(seam[act], np.minimum(s_out, s_in))
    return x, ny, a21, a22, seam


def df_jacobian(x, y, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> Jac2:
    """Lower-triangular Jacobian of ``F`` (or ``F^-1``) at ``(x, y)``."""
    _, _, a21, a22, seam = _f_with_jacobian(x, y, ann, inverse)
    _check_seam(seam, "df_jacobian", stage="F^-1" if inverse else "F")
    return Jac2(_o(np.ones_like(a21)), _o(np.zeros_like(a21)), _o(a21), _o(a22))


def _apply_f_jac(J, a21, a22):
    # [[1, 0], [a21, a22]] @ J
    return Jac2(J.a11, J.a12, a21 * J.a11 + a22 * J.a21, a21 * J.a12 + a22 * J.a22)


def _apply_omega_jac(J, sigma):
    # sigma * [[0, -1], [1, 0]] @ J
    return Jac2(-sigma * J.a21, -sigma * J.a22, sigma * J.a11, sigma * J.a12)


_FORWARD = (("F", False), ("Omega", False), ("F^-1", True), ("Omega^-1", True))
_BACKWARD = (("Omega", False), ("F", False), ("Omega^-1", True), ("F^-1", True))


def _h_chain(x, y, ann, inverse):
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    one = np.ones(x.shape)
    zero = np.zeros(x.shape)
    J = Jac2(one, zero, zero, one)
    seams = []
    for name, inv in (_BACKWARD if inverse else _FORWARD):
        if name.startswith("F"):
            x, y, a21, a22, s = _f_with_jacobian(x, y, ann, inv)
            J = _apply_f_jac(J, a21, a22)
            seams.append((name, s))
        else:
            sigma = omega_jacobian(x, y, inverse=inv, ann=ann)
            x, y = (np.asarray(a) for a in omega(x, y, inverse=inv, ann=ann))
            J = _apply_omega_jac(J, sigma)
    return x, y, J, seams


def h_with_jacobian(x, y, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False):
    """``H(z)`` (or ``H^-1(z)``), its Jacobian, and per-point seam distance.

    Unchecked: callers decide what to do with points near seams.  Returns
    ``(hx, hy, Jac2, seam)`` where ``seam`` is the smallest seam distance
    met by each point anywhere along the four-stage chain.
    """
    hx, hy, J, seams = _h_chain(x, y, ann, inverse)
    return hx, hy, J, np.minimum(seams[0][1], seams[1][1])


def dh_jacobian(x, y, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> Jac2:
    """Jacobian of ``H = Omega^-1 F^-1 Omega F`` by the chain rule (or of ``H^-1``)."""
    _, _, J, seams = _h_chain(x, y, ann, inverse)
    for name, s in seams:
        _check_seam(s, "dh_jacobian", stage=name)
    return Jac2(*(_o(a) for a in J))


def in_cone(b1, b2, cone: ConeId = ConeId.C, tol: float = CONE_TOL):
    """Sign test for membership of ``(b1, b2)`` in ``C`` or ``C~``.

    Vectors with ``|b1 b2| <= tol |w|^2`` are on the shared boundary and
    belong to both cones.
    """
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    prod = b1 * b2
    edge = np.abs(prod) <= tol * (b1 * b1 + b2 * b2)
    inside = prod >= 0.0 if cone is ConeId.C else prod <= 0.0
    res = inside | edge
    return bool(res) if res.ndim == 0 else res
