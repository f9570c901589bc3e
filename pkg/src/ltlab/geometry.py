"""Planar geometry of the two overlapping annuli.

The annulus ``A+`` is centred at (-1, 0) and ``A-`` at (1, 0); both have
radii in ``[r0, r1]``.  Polar charts ``M+`` and ``M-`` map ``(r, theta)``
onto the plane.  All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple

import numpy as np

from .errors import CentreSingularity, DomainError

SQRT7 = math.sqrt(7.0)

#: Half-width of the band around the annulus boundaries that still counts as
#: inside, so that round-off in long orbits never pushes a point out of ``A``.
BOUNDARY_TOL = 1e-12


class PlanePoint(NamedTuple):
    u: np.ndarray | float
    v: np.ndarray | float


class PolarPoint(NamedTuple):
    r: np.ndarray | float
    theta: np.ndarray | float


class Region(IntEnum):
    APlusInner = 0
    SigmaPlus = 1
    SigmaMinus = 2
    APlusOuter = 3
    AMinusOnly = 4
    Outside = 5


def is_admissible(r0: float, r1: float) -> bool:
    """True when the annuli meet in two disjoint lens-shaped regions.

    Requires ``0 < r0 < r1 < pi`` plus ``r0 > 1`` (the inner circles keep
    the segment between the centres out of the overlap) and ``r1 < r0 + 2``.
    """
    return bool(0.0 < r0 < r1 < math.pi and r0 > 1.0 and r1 < r0 + 2.0)


def _boundary_angles(r, r0, r1):
    ti = np.arccos((r * r + 4.0 - r0 * r0) / (4.0 * r))
    to = np.arccos((r * r + 4.0 - r1 * r1) / (4.0 * r))
    return ti, to


@dataclass(frozen=True)
class AnnulusPair:
    """Radii of the two annuli.  The default is the pair (2, sqrt 7)."""

    r0: float = 2.0
    r1: float = SQRT7

    def __post_init__(self):
        if not is_admissible(self.r0, self.r1):
            raise DomainError(
                f"inadmissible annuli r0={self.r0!r}, r1={self.r1!r}: need "
                "1 < r0 < r1 < min(pi, r0 + 2) for two disjoint overlaps"
            )
        # disjointness of Sigma+/Sigma-: the inner boundary angle never reaches 0
        ti, to = _boundary_angles(np.array([self.r0, self.r1]), self.r0, self.r1)
        if not (np.all(ti > 0.0) and np.all(to < math.pi) and np.all(ti < to)):
            raise DomainError(f"overlap regions of ({self.r0}, {self.r1}) are not disjoint")

    @property
    def c(self) -> float:
        """Twist slope ``2 pi / (r1 - r0)``."""
        return 2.0 * math.pi / (self.r1 - self.r0)

    def contains_radius(self, r, tol: float = 0.0):
        r = np.asarray(r)
        return (r >= self.r0 - tol) & (r <= self.r1 + tol)


DEFAULT_PAIR = AnnulusPair()


def wrap_angle(theta):
    """Wrap onto ``(-pi, pi]``; ``-pi`` is never produced."""
    theta = np.asarray(theta, dtype=float)
    out = math.pi - np.mod(math.pi - theta, 2.0 * math.pi)
    return out if out.ndim else float(out)


def m_plus(r, theta) -> PlanePoint:
    r = np.asarray(r, dtype=float)
    theta = np.asarray(theta, dtype=float)
    return PlanePoint(r * np.cos(theta) - 1.0, r * np.sin(theta))


def m_minus(r, theta) -> PlanePoint:
    u, v = m_plus(r, theta)
    return PlanePoint(-u, -v)


def _polar(a, b) -> PolarPoint:
    r = np.hypot(a, b)
    if np.any(r == 0.0):
        raise CentreSingularity("polar angle is undefined at the annulus centre")
    return PolarPoint(r, wrap_angle(np.arctan2(b, a)))


def m_plus_inv(u, v) -> PolarPoint:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return _polar(u + 1.0, v)


def m_minus_inv(u, v) -> PolarPoint:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return _polar(1.0 - u, -v)


def centre_distances(u, v):
    """Distances ``(d+, d-)`` from the point to (-1, 0) and (1, 0)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.hypot(u + 1.0, v), np.hypot(u - 1.0, v)


def in_annuli(u, v, ann: AnnulusPair = DEFAULT_PAIR, tol: float = BOUNDARY_TOL):
    """Membership masks ``(in A+, in A-)``."""
    dp, dm = centre_distances(u, v)
    return ann.contains_radius(dp, tol), ann.contains_radius(dm, tol)


def classify(u, v, ann: AnnulusPair = DEFAULT_PAIR):
    """Region tag of each point.

    Sigma is closed: points on the boundary circles of either annulus that
    belong to both annuli are tagged SigmaPlus/SigmaMinus.  Returns a
    :class:`Region` for scalar input and an int array of tags otherwise.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    dp, dm = centre_distances(u, v)
    in_p = ann.contains_radius(dp)
    in_m = ann.contains_radius(dm)
    both = in_p & in_m
    if np.any(both & (v == 0.0)):
        raise DomainError("a point of the overlap lies on v = 0; annuli are not disjoint")
    tag = np.full(np.broadcast(u, v).shape, int(Region.Outside), dtype=int)
    tag = np.where(in_m & ~in_p, int(Region.AMinusOnly), tag)
    tag = np.where(in_p & ~in_m & (dm < ann.r0), int(Region.APlusInner), tag)
    tag = np.where(in_p & ~in_m & (dm > ann.r1), int(Region.APlusOuter), tag)
    tag = np.where(both & (v > 0), int(Region.SigmaPlus), tag)
    tag = np.where(both & (v < 0), int(Region.SigmaMinus), tag)
    if tag.ndim == 0:
        return Region(int(tag))
    return tag


def region_boundaries(r, ann: AnnulusPair = DEFAULT_PAIR):
    """Polar angles (in the ``A+`` chart) where the circle of radius ``r``
    enters and leaves ``A-``.

    Returns ``(theta_i, theta_o)`` with ``d-(r, theta_i) = r0`` and
    ``d-(r, theta_o) = r1``; both come from the law of cosines with centre
    distance 2.
    """
    r = np.asarray(r, dtype=float)
    a = (r * r + 4.0 - ann.r0**2) / (4.0 * r)
    b = (r * r + 4.0 - ann.r1**2) / (4.0 * r)
    if np.any(np.abs(a) > 1.0) or np.any(np.abs(b) > 1.0):
        raise DomainError("circle of radius r does not cross both boundaries of A-")
    return np.arccos(a), np.arccos(b)


def boundary_angle_derivatives(r, ann: AnnulusPair = DEFAULT_PAIR):
    """``d theta_i / dr`` and ``d theta_o / dr``."""
    r = np.asarray(r, dtype=float)
    a = (r * r + 4.0 - ann.r0**2) / (4.0 * r)
    b = (r * r + 4.0 - ann.r1**2) / (4.0 * r)
    da = (r * r - 4.0 + ann.r0**2) / (4.0 * r * r)
    db = (r * r - 4.0 + ann.r1**2) / (4.0 * r * r)
    return -da / np.sqrt(1.0 - a * a), -db / np.sqrt(1.0 - b * b)


def sample_annuli(rng: np.random.Generator, n: int, ann: AnnulusPair = DEFAULT_PAIR) -> PlanePoint:
    """Draw ``n`` points uniformly (Lebesgue) from ``A = A+ u A-`` by rejection."""
    us, vs = [], []
    have = 0
    while have < n:
        m = max(2 * (n - have), 64)
        u = rng.uniform(-1.0 - ann.r1, 1.0 + ann.r1, m)
        v = rng.uniform(-ann.r1, ann.r1, m)
        ip, im = in_annuli(u, v, ann, tol=0.0)
        keep = ip | im
        us.append(u[keep])
        vs.append(v[keep])
        have += int(keep.sum())
    return PlanePoint(np.concatenate(us)[:n], np.concatenate(vs)[:n])
