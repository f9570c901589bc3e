"""Twist map on the annulus and the planar linked-twist map built from it."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .errors import DomainError
from .geometry import (
    BOUNDARY_TOL,
    DEFAULT_PAIR,
    AnnulusPair,
    PlanePoint,
    PolarPoint,
    centre_distances,
    m_minus,
    m_minus_inv,
    m_plus,
    m_plus_inv,
    wrap_angle,
)


class MapId(Enum):
    Lambda = "lambda"
    LambdaInv = "lambda-inv"
    Phi = "phi"
    PhiInv = "phi-inv"
    Gamma = "gamma"
    GammaInv = "gamma-inv"
    Theta = "theta"
    ThetaInv = "theta-inv"

    @property
    def inverse(self) -> "MapId":
        name = self.name
        return MapId[name[:-3]] if name.endswith("Inv") else MapId[name + "Inv"]


def twist(r, theta, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> PolarPoint:
    """Rotate the circle of radius ``r`` by ``c (r - r0)`` (or back, if ``inverse``)."""
    r = np.asarray(r, dtype=float)
    if not np.all(ann.contains_radius(r, BOUNDARY_TOL)):
        raise DomainError("twist is only defined for r in [r0, r1]")
    r = np.clip(r, ann.r0, ann.r1)
    sign = -1.0 if inverse else 1.0
    return PolarPoint(r, wrap_angle(np.asarray(theta) + sign * ann.c * (r - ann.r0)))


def _planar_twist(u, v, ann, centre_sign, inverse):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    u, v = np.broadcast_arrays(u, v)
    dp, dm = centre_distances(u, v)
    in_p = ann.contains_radius(dp, BOUNDARY_TOL)
    in_m = ann.contains_radius(dm, BOUNDARY_TOL)
    if not np.all(in_p | in_m):
        raise DomainError("point outside A = A+ u A-")
    inside = in_p if centre_sign > 0 else in_m
    out_u = np.array(u, dtype=float, copy=True)
    out_v = np.array(v, dtype=float, copy=True)
    if np.any(inside):
        chart_inv, chart = (m_plus_inv, m_plus) if centre_sign > 0 else (m_minus_inv, m_minus)
        r, th = chart_inv(u[inside], v[inside])
        r, th = twist(r, th, ann, inverse)
        out_u[inside], out_v[inside] = chart(r, th)
    if out_u.ndim == 0:
        return PlanePoint(float(out_u), float(out_v))
    return PlanePoint(out_u, out_v)


def phi(u, v, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> PlanePoint:
    """Twist on ``A+`` (conjugated by ``M+``); identity on the rest of ``A``."""
    return _planar_twist(u, v, ann, +1, inverse)


def gamma(u, v, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> PlanePoint:
    """Inverse twist on ``A-`` (conjugated by ``M-``); identity on the rest of ``A``."""
    return _planar_twist(u, v, ann, -1, not inverse)


def theta_map(u, v, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> PlanePoint:
    """The linked-twist map ``Gamma o Phi`` or its inverse."""
    if inverse:
        return phi(*gamma(u, v, ann, inverse=True), ann, inverse=True)
    return gamma(*phi(u, v, ann), ann)


def apply_map(map_id: MapId, a, b, ann: AnnulusPair = DEFAULT_PAIR):
    """One step of ``map_id``.  Lambda maps act on polar ``(r, theta)``, the rest on ``(u, v)``."""
    inv = map_id.name.endswith("Inv")
    base = map_id.name[:-3] if inv else map_id.name
    if base == "Lambda":
        return twist(a, b, ann, inv)
    fn = {"Phi": phi, "Gamma": gamma, "Theta": theta_map}[base]
    return fn(a, b, ann, inverse=inv)


def iterate(a, b, ann: AnnulusPair = DEFAULT_PAIR, n: int = 1, map_id: MapId = MapId.Theta):
    """Orbit ``[p, f(p), ..., f^n(p)]`` stacked along a new leading axis."""
    if n < 0:
        raise ValueError("n must be non-negative")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    xs = np.empty((n + 1,) + a.shape)
    ys = np.empty((n + 1,) + a.shape)
    xs[0], ys[0] = a, b
    for k in range(n):
        xs[k + 1], ys[k + 1] = apply_map(map_id, xs[k], ys[k], ann)
    return xs, ys
