"""The linked-twist map written on the torus: ``F``, ``G``, ``H`` and the
first-return map to ``S``, plus continuous lifts of curves to the plane.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .bipolar import (
    TorusPoint,
    in_interval,
    in_R,
    in_R_prime,
    in_S,
    iota,
    omega,
    psi,
    psi_inv,
)
from .errors import DomainError, LiftAmbiguity, NoReturnWithinBudget
from .geometry import BOUNDARY_TOL, DEFAULT_PAIR, AnnulusPair, wrap_angle

TWO_PI = 2.0 * math.pi
LIFT_STEP_MAX = math.pi / 2


class LatticePoint(NamedTuple):
    U: np.ndarray | float
    V: np.ndarray | float


def _out(a):
    return float(a) if np.ndim(a) == 0 else a


def _f(x, y, ann, inverse):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    act = in_interval(x, ann, BOUNDARY_TOL)
    ny = np.array(y, dtype=float, copy=True)
    if np.any(act):
        xa = np.clip(x[act], ann.r0, ann.r1)
        sign = -1.0 if inverse else 1.0
        yt = wrap_angle(psi_inv(xa, y[act], ann) + sign * ann.c * (xa - ann.r0))
        ny[act] = wrap_angle(psi(xa, yt, ann))
    return x, ny


def _require(mask, what):
    if not np.all(mask):
        raise DomainError(f"torus point not in {what}")


def f_map(x, y, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> TorusPoint:
    """``Phi`` in torus coordinates: twist along ``x`` in ``I``, identity elsewhere."""
    _require(in_R(x, y, ann), "R")
    fx, fy = _f(x, y, ann, inverse)
    return TorusPoint(_out(fx), _out(fy))


def g_map(x, y, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> TorusPoint:
    """``Gamma`` in the coordinates of ``R'``: ``iota F^-1 iota^-1`` on ``S^1 x I``."""
    _require(in_R_prime(x, y, ann), "R'")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    a, b = iota(x, y, inverse=True)
    a, b = _f(a, b, ann, not inverse)
    gx, gy = iota(a, b)
    act = in_interval(y, ann, BOUNDARY_TOL)
    return TorusPoint(_out(np.where(act, gx, x)), _out(np.where(act, gy, y)))


def _h(x, y, ann, inverse):
    if inverse:
        x, y = omega(x, y, ann=ann)
        x, y = _f(x, y, ann, False)
        x, y = omega(x, y, inverse=True, ann=ann)
        return _f(x, y, ann, True)
    x, y = _f(x, y, ann, False)
    x, y = omega(x, y, ann=ann)
    x, y = _f(x, y, ann, True)
    return omega(x, y, inverse=True, ann=ann)


def h_map(x, y, ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False) -> TorusPoint:
    """The linked-twist map on ``R``: ``Omega^-1 o F^-1 o Omega o F``.

    The inverse is ``F^-1 o Omega^-1 o F o Omega``.
    """
    _require(in_R(x, y, ann), "R")
    hx, hy = _h(x, y, ann, inverse)
    return TorusPoint(_out(hx), _out(hy))


def r_to_rprime(x, y, ann: AnnulusPair = DEFAULT_PAIR) -> TorusPoint:
    """Move ``Sigma-`` from ``I x -I`` (its place in ``R``) to ``-I x I``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    flip = in_interval(x, ann) & in_interval(-y, ann)
    return TorusPoint(_out(np.where(flip, wrap_angle(-x), x)), _out(np.where(flip, wrap_angle(-y), y)))


def rprime_to_r(x, y, ann: AnnulusPair = DEFAULT_PAIR) -> TorusPoint:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    flip = in_interval(-x, ann) & in_interval(y, ann)
    return TorusPoint(_out(np.where(flip, wrap_angle(-x), x)), _out(np.where(flip, wrap_angle(-y), y)))


def h_map_longhand(x, y, ann: AnnulusPair = DEFAULT_PAIR) -> TorusPoint:
    """``(R' -> R) o G o (R -> R') o F``, composed step by step.

    Used to cross-check the closed form in :func:`h_map`.
    """
    x, y = f_map(x, y, ann)
    x, y = r_to_rprime(x, y, ann)
    x, y = g_map(x, y, ann)
    return rprime_to_r(x, y, ann)


def return_map_S(x, y, ann: AnnulusPair = DEFAULT_PAIR, max_iters: int = 10**6):
    """First return of ``H`` to ``S``.

    Returns ``(TorusPoint, return_time)``; works elementwise on arrays.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    y = np.atleast_1d(np.asarray(y, dtype=float)).copy()
    scalar = np.ndim(x) == 1 and x.size == 1 and np.ndim(y) == 1
    if not np.all(in_S(x, y, ann, BOUNDARY_TOL)):
        raise DomainError("return map needs a starting point in S")
    times = np.zeros(x.shape, dtype=np.int64)
    active = np.ones(x.shape, dtype=bool)
    n = 0
    while np.any(active):
        if n >= max_iters:
            raise NoReturnWithinBudget(
                f"{int(active.sum())} orbit(s) did not return to S within {max_iters} iterates"
            )
        n += 1
        x[active], y[active] = _h(x[active], y[active], ann, False)
        back = active & in_S(x, y, ann, BOUNDARY_TOL)
        times[back] = n
        active &= ~back
    if scalar:
        return TorusPoint(float(x[0]), float(y[0])), int(times[0])
    return TorusPoint(x, y), times


def project(U, V, ann: AnnulusPair = DEFAULT_PAIR) -> TorusPoint:
    """Covering projection ``R_2 -> R``: reduce mod 2 pi, then fold ``-R`` onto ``R``."""
    x = wrap_angle(U)
    y = wrap_angle(V)
    neg = ~in_R(x, y, ann)
    return TorusPoint(_out(np.where(neg, wrap_angle(-np.asarray(x)), x)),
                      _out(np.where(neg, wrap_angle(-np.asarray(y)), y)))


def lift_curve(xs, ys, base: LatticePoint | None = None, ann: AnnulusPair = DEFAULT_PAIR,
               max_step: float = LIFT_STEP_MAX) -> LatticePoint:
    """Continuous lift of a torus polyline into the covering lattice ``R_2``.

    ``base`` is the lift of the first vertex; it may sit over ``-R``, in
    which case the whole polyline is lifted through the fold.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0:
        return LatticePoint(xs.copy(), ys.copy())
    dx = wrap_angle(np.diff(xs))
    dy = wrap_angle(np.diff(ys))
    bad = (np.abs(dx) >= max_step) | (np.abs(dy) >= max_step)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise LiftAmbiguity(f"step {k} -> {k + 1} exceeds {max_step:.4g}; lift is ambiguous")
    sign = 1.0
    if base is None:
        U0, V0 = float(xs[0]), float(ys[0])
    else:
        U0, V0 = float(base.U), float(base.V)
        bx, by = wrap_angle(U0), wrap_angle(V0)
        if _torus_dist(bx, by, xs[0], ys[0]) < 1e-9:
            sign = 1.0
        elif _torus_dist(bx, by, -xs[0], -ys[0]) < 1e-9:
            sign = -1.0
        else:
            raise DomainError("base point does not lie over the first curve vertex")
    U = U0 + sign * np.concatenate(([0.0], np.cumsum(dx)))
    V = V0 + sign * np.concatenate(([0.0], np.cumsum(dy)))
    return LatticePoint(U, V)


def _torus_dist(x1, y1, x2, y2):
    return float(np.hypot(wrap_angle(x1 - x2), wrap_angle(y1 - y2)))


def torus_delta(x1, y1, x2, y2):
    """Shortest displacement from ``(x1, y1)`` to ``(x2, y2)`` on the torus."""
    return wrap_angle(np.asarray(x2) - x1), wrap_angle(np.asarray(y2) - y1)
