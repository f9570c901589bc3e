"""Numerical evidence for hyperbolicity and mixing.

Lyapunov exponents by QR renormalisation, alignment of pushed tangent
vectors with the invariant cones, stretching of material lines, stable /
unstable curve intersections in the covering lattice, and decay of a
coarse-grained scalar field.

Random numbers come from Philox streams keyed by ``(seed, orbit, attempt)``,
so an orbit's result never depends on how orbits are batched or scheduled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .bipolar import from_torus, in_interval, in_R, to_torus
from ._parallel import parallel_map
from .cones import SEAM_TOL, ConeId, h_with_jacobian, in_cone
from .errors import (
    NonFiniteAccumulation,
    PointBudgetExceeded,
    SeamEncounter,
)
from .geometry import (
    BOUNDARY_TOL,
    DEFAULT_PAIR,
    AnnulusPair,
    centre_distances,
    sample_annuli,
    wrap_angle,
)
from .torus import _h, lift_curve, project, torus_delta
from .twist import phi, theta_map

log = logging.getLogger(__name__)

START_MARGIN = 1e-9
FD_STEP = 1e-6
DEFAULT_BURN_IN = 1000
DEFAULT_REFINEMENT_TOL = 1e-3
DEFAULT_POINT_BUDGET = 10**7
#: orbits per vectorised batch; fixed so results do not depend on --threads
BATCH = 100


def orbit_rng(seed: int, orbit: int = 0, attempt: int = 0) -> np.random.Generator:
    """Counter-based stream for one orbit."""
    ss = np.random.SeedSequence(seed, spawn_key=(orbit, attempt))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# seam distances
# ---------------------------------------------------------------------------

def plane_seam_distance(u, v, ann: AnnulusPair = DEFAULT_PAIR):
    """Distance (in radius) to the circles where ``Theta`` stops being smooth.

    Those are the boundary circles of ``A+`` at ``p`` and of ``A-`` at ``Phi(p)``.
    """
    dp, _ = centre_distances(u, v)
    pu, pv = phi(u, v, ann)
    _, dm = centre_distances(pu, pv)
    return np.minimum(
        np.minimum(np.abs(dp - ann.r0), np.abs(dp - ann.r1)),
        np.minimum(np.abs(dm - ann.r0), np.abs(dm - ann.r1)),
    )


def torus_seam_distance(x, y, ann: AnnulusPair = DEFAULT_PAIR):
    return h_with_jacobian(x, y, ann)[3]


def draw_start(rng: np.random.Generator, ann: AnnulusPair = DEFAULT_PAIR, frame: str = "plane",
               margin: float = START_MARGIN):
    """Uniform point of ``A`` (or its torus image) away from every seam."""
    while True:
        u, v = sample_annuli(rng, 1, ann)
        u, v = float(u[0]), float(v[0])
        if plane_seam_distance(u, v, ann) < margin:
            continue
        if frame == "plane":
            return u, v
        x, y = to_torus(u, v, ann)
        if torus_seam_distance(x, y, ann) >= margin:
            return float(x), float(y)


# ---------------------------------------------------------------------------
# Jacobians along orbits
# ---------------------------------------------------------------------------

def _plane_signature(u, v, ann):
    dp, _ = centre_distances(u, v)
    pu, pv = phi(u, v, ann)
    _, dm = centre_distances(pu, pv)
    return ann.contains_radius(dp) * 2 + ann.contains_radius(dm)


def theta_fd_jacobian(u, v, ann: AnnulusPair = DEFAULT_PAIR, h: float = FD_STEP):
    """``Theta(p)`` and its finite-difference Jacobian ``(a11, a12, a21, a22)``.

    Central differences, except where the stencil crosses a circle on which
    ``Theta`` is only piecewise smooth; there the one-sided quotient on the
    side of ``p`` is used.
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    n = u.size
    su = np.concatenate([u, u + h, u - h, u, u])
    sv = np.concatenate([v, v, v, v + h, v - h])
    fu, fv = theta_map(su, sv, ann)
    sig = _plane_signature(su, sv, ann)
    fu = fu.reshape(5, n)
    fv = fv.reshape(5, n)
    sig = sig.reshape(5, n)
    cols = []
    for k in (0, 1):
        ip, im = 1 + 2 * k, 2 + 2 * k
        central_u = (fu[ip] - fu[im]) / (2 * h)
        central_v = (fv[ip] - fv[im]) / (2 * h)
        fwd_u = (fu[ip] - fu[0]) / h
        fwd_v = (fv[ip] - fv[0]) / h
        bwd_u = (fu[0] - fu[im]) / h
        bwd_v = (fv[0] - fv[im]) / h
        ok_p = sig[ip] == sig[0]
        ok_m = sig[im] == sig[0]
        du = np.where(ok_p & ok_m, central_u, np.where(ok_p, fwd_u, np.where(ok_m, bwd_u, central_u)))
        dv = np.where(ok_p & ok_m, central_v, np.where(ok_p, fwd_v, np.where(ok_m, bwd_v, central_v)))
        cols.append((du, dv))
    (a11, a21), (a12, a22) = cols
    return fu[0], fv[0], (a11, a12, a21, a22)


def _step(frame, a, b, ann, inverse=False):
    """Advance orbit points; return new points, Jacobian entries, seam distance."""
    if frame == "plane":
        if inverse:
            raise ValueError("backward transport is only implemented in the torus frame")
        seam = plane_seam_distance(a, b, ann)
        na, nb, J = theta_fd_jacobian(a, b, ann)
        return na, nb, J, seam
    na, nb, J, seam = h_with_jacobian(a, b, ann, inverse)
    return na, nb, tuple(J), seam


# ---------------------------------------------------------------------------
# Lyapunov exponents
# ---------------------------------------------------------------------------

@dataclass
class LyapunovEstimate:
    lambda1: float
    lambda2: float
    steps: int
    burn_in: int
    seed: int
    orbit: int = 0
    frame: str = "plane"
    attempt: int = 0
    start: tuple = field(default=(math.nan, math.nan))

    def __post_init__(self):
        if self.steps <= self.burn_in:
            raise ValueError("steps must exceed burn_in")


def _qr_run(frame, a, b, steps, burn_in, ann):
    """Vectorised QR-renormalised Jacobian products for a batch of orbits."""
    n = a.size
    v1, v2 = np.ones(n), np.zeros(n)
    w1, w2 = np.zeros(n), np.ones(n)
    s1 = np.zeros(n)
    s2 = np.zeros(n)
    bad = np.zeros(n, dtype=bool)
    for k in range(steps):
        a, b, (j11, j12, j21, j22), seam = _step(frame, a, b, ann)
        bad |= seam < SEAM_TOL
        p1 = j11 * v1 + j12 * v2
        p2 = j21 * v1 + j22 * v2
        q1 = j11 * w1 + j12 * w2
        q2 = j21 * w1 + j22 * w2
        n1 = np.hypot(p1, p2)
        p1 /= n1
        p2 /= n1
        dot = q1 * p1 + q2 * p2
        q1 -= dot * p1
        q2 -= dot * p2
        n2 = np.hypot(q1, q2)
        q1 /= n2
        q2 /= n2
        if k >= burn_in:
            s1 += np.log(n1)
            s2 += np.log(n2)
        v1, v2, w1, w2 = p1, p2, q1, q2
    m = steps - burn_in
    return s1 / m, s2 / m, bad


def _batched(indices, size=BATCH):
    for i in range(0, len(indices), size):
        yield indices[i:i + size]


def _run_orbits(idx, runner, max_reseeds, threads):
    """Run fixed-size orbit batches, re-drawing seam-hit orbits inside their batch.

    ``runner(pairs)`` takes ``[(orbit, attempt), ...]`` and returns one result
    per pair, ``None`` marking a seam encounter.  Batch composition depends
    only on the orbit list, so results do not depend on ``threads``.
    """

    def one_batch(batch):
        done = {}
        pending = [(i, 0) for i in batch]
        while pending:
            retry = []
            for (i, att), res in zip(pending, runner(pending)):
                if res is not None:
                    done[i] = res
                elif att >= max_reseeds:
                    raise SeamEncounter(
                        f"orbit {i} met a seam on all {max_reseeds + 1} attempts; try another seed"
                    )
                else:
                    retry.append((i, att + 1))
            pending = retry
        return [done[i] for i in batch]

    out = []
    for part in parallel_map(one_batch, list(_batched(idx)), threads):
        out.extend(part)
    return out


def _orbit_list(orbits):
    return list(range(orbits)) if isinstance(orbits, int) else list(orbits)


def lyapunov_orbits(seed: int, orbits, steps: int, burn_in: int = DEFAULT_BURN_IN,
                    ann: AnnulusPair = DEFAULT_PAIR, frame: str = "plane",
                    max_reseeds: int = 3, threads: int = 1) -> list[LyapunovEstimate]:
    """Lyapunov exponents for several orbits of one run seed.

    ``orbits`` is a count or a list of orbit indices.  An orbit that hits a
    seam is redrawn from its next stream (up to ``max_reseeds`` times).
    """
    if steps < 1000:
        raise ValueError("steps must be at least 1000")
    if steps <= burn_in:
        raise ValueError("steps must exceed burn_in")
    if frame not in ("plane", "torus"):
        raise ValueError(f"unknown frame {frame!r}")

    def runner(pairs):
        starts = [draw_start(orbit_rng(seed, i, att), ann, frame) for i, att in pairs]
        a = np.array([s[0] for s in starts])
        b = np.array([s[1] for s in starts])
        l1, l2, bad = _qr_run(frame, a, b, steps, burn_in, ann)
        res = []
        for j, (i, att) in enumerate(pairs):
            if bad[j]:
                res.append(None)
                continue
            if not (np.isfinite(l1[j]) and np.isfinite(l2[j])):
                raise NonFiniteAccumulation(f"orbit {i}: non-finite exponent sum")
            hi, lo = max(l1[j], l2[j]), min(l1[j], l2[j])
            res.append(LyapunovEstimate(float(hi), float(lo), steps, burn_in, seed, i, frame,
                                        att, starts[j]))
        return res

    return _run_orbits(_orbit_list(orbits), runner, max_reseeds, threads)


def lyapunov(seed: int, steps: int, burn_in: int = DEFAULT_BURN_IN, ann: AnnulusPair = DEFAULT_PAIR,
             frame: str = "plane", orbit: int = 0) -> LyapunovEstimate:
    """Both Lyapunov exponents (per iterate) of a single random orbit."""
    return lyapunov_orbits(seed, [orbit], steps, burn_in, ann, frame)[0]


# ---------------------------------------------------------------------------
# cone alignment
# ---------------------------------------------------------------------------

@dataclass
class AlignmentResult:
    seed: int
    orbit: int
    fraction: float
    cone: str
    direction: str
    steps: int
    burn_in: int
    attempt: int = 0


def alignment_orbits(seed: int, orbits, steps: int = 10**4, burn_in: int = DEFAULT_BURN_IN,
                     ann: AnnulusPair = DEFAULT_PAIR, inverse: bool = False,
                     initial: str = "random", max_reseeds: int = 3,
                     threads: int = 1) -> list[AlignmentResult]:
    """Fraction of post-burn-in iterates at which a pushed tangent vector lies in the cone.

    Forward transport by ``DH`` is tested against ``C``; backward transport
    by ``DH^-1`` (``inverse=True``) against ``C~``.  ``initial='cone'``
    starts from a vector inside the target cone and counts from iterate 0.
    """
    if steps <= burn_in:
        raise ValueError("steps must exceed burn_in")
    if initial not in ("random", "cone"):
        raise ValueError(f"unknown initial vector mode {initial!r}")
    cone = ConeId.CTilde if inverse else ConeId.C

    def runner(pairs):
        rngs = [orbit_rng(seed, i, att) for i, att in pairs]
        starts = [draw_start(g, ann, "torus") for g in rngs]
        x = np.array([s[0] for s in starts])
        y = np.array([s[1] for s in starts])
        ang = np.array([g.uniform(0.0, 2 * math.pi) for g in rngs])
        if initial == "cone":
            # strictly inside the quadrant pair of the target cone
            base = np.mod(ang, math.pi / 2) * 0.98 + 0.01 * math.pi / 2
            ang = base if cone is ConeId.C else base + math.pi / 2
            count_from = 0
        else:
            count_from = burn_in
        b1, b2 = np.cos(ang), np.sin(ang)
        hits = np.zeros(len(pairs))
        bad = np.zeros(len(pairs), dtype=bool)
        for k in range(steps):
            x, y, J, seam = h_with_jacobian(x, y, ann, inverse)
            bad |= seam < SEAM_TOL
            b1, b2 = J.a11 * b1 + J.a12 * b2, J.a21 * b1 + J.a22 * b2
            nrm = np.hypot(b1, b2)
            b1 /= nrm
            b2 /= nrm
            if k >= count_from:
                hits += in_cone(b1, b2, cone)
        total = steps - count_from
        return [None if bad[j] else
                AlignmentResult(seed, i, float(hits[j] / total), cone.value,
                                "backward" if inverse else "forward", steps, burn_in, att)
                for j, (i, att) in enumerate(pairs)]

    return _run_orbits(_orbit_list(orbits), runner, max_reseeds, threads)


def alignment_check(seed: int, steps: int = 10**4, burn_in: int = DEFAULT_BURN_IN,
                    ann: AnnulusPair = DEFAULT_PAIR, orbit: int = 0, inverse: bool = False) -> float:
    return alignment_orbits(seed, [orbit], steps, burn_in, ann, inverse)[0].fraction


def estimate_direction(x: float, y: float, ann: AnnulusPair = DEFAULT_PAIR, unstable: bool = True,
                       depth: int = 60):
    """Unit vector approximating ``E^u(z)`` (or ``E^s(z)``) by power iteration.

    For ``E^u`` a generic vector is pushed by ``DH`` along the orbit segment
    ``H^-depth(z), ..., z``; for ``E^s`` by ``DH^-1`` along ``H^depth(z), ..., z``.
    """
    pts = [(x, y)]
    for _ in range(depth):
        pts.append(tuple(float(c) for c in _h(pts[-1][0], pts[-1][1], ann, unstable)))
    b1, b2 = (1.0, 0.5) if unstable else (1.0, -0.5)
    for px, py in reversed(pts[1:]):
        _, _, J, _ = h_with_jacobian(px, py, ann, inverse=not unstable)
        b1, b2 = float(J.a11 * b1 + J.a12 * b2), float(J.a21 * b1 + J.a22 * b2)
        nrm = math.hypot(b1, b2)
        b1, b2 = b1 / nrm, b2 / nrm
    return b1, b2


# ---------------------------------------------------------------------------
# material lines
# ---------------------------------------------------------------------------

MAPS = ("theta_plane", "theta_plane_inv", "h_torus", "h_torus_inv", "identity")


@dataclass
class CurveRecord:
    """Polyline with per-iterate lengths.

    ``a, b`` are ``(u, v)`` for plane maps and ``(x, y)`` for torus maps.
    Torus lengths leave out segments that cross the ``Sigma-`` chart seam;
    ``plane_lengths`` holds the same curve measured in the plane.
    """

    a: np.ndarray
    b: np.ndarray
    lengths_per_iterate: list = field(default_factory=list)
    refinement_tol: float = DEFAULT_REFINEMENT_TOL
    frame: str = "plane"
    plane_lengths: list = field(default_factory=list)

    @property
    def points(self):
        return np.column_stack([self.a, self.b])

    @classmethod
    def segment(cls, p0, p1, n: int = 2, frame: str = "plane", refinement_tol=DEFAULT_REFINEMENT_TOL):
        t = np.linspace(0.0, 1.0, n)
        a = p0[0] + t * (p1[0] - p0[0])
        b = p0[1] + t * (p1[1] - p0[1])
        if frame == "torus":
            a, b = wrap_angle(a), wrap_angle(b)
        return cls(a, b, [], refinement_tol, frame)


def _map_fn(name, ann):
    if name == "theta_plane":
        return lambda a, b: theta_map(a, b, ann)
    if name == "theta_plane_inv":
        return lambda a, b: theta_map(a, b, ann, inverse=True)
    if name == "h_torus":
        return lambda a, b: _h(a, b, ann, False)
    if name == "h_torus_inv":
        return lambda a, b: _h(a, b, ann, True)
    if name == "identity":
        return lambda a, b: (np.array(a, dtype=float), np.array(b, dtype=float))
    raise ValueError(f"unknown map {name!r}; expected one of {MAPS}")


def _frame_of(name, default="plane"):
    if name == "identity":
        return default
    return "torus" if name.startswith("h_") else "plane"


def chart_jumps(x, y, ann: AnnulusPair = DEFAULT_PAIR):
    """Mask of torus segments ``i -> i+1`` that cross the ``Sigma-`` seam of ``R``.

    ``Sigma-`` sits at ``I x -I`` in the ``A+`` chart while its neighbours in
    ``A-`` use the rotated chart, so a segment joining the two charts next
    to ``Sigma-`` (``A+`` end with ``y < 0``) is not part of the curve.
    Chart changes next to ``Sigma+`` are continuous.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    plus = in_interval(x, ann, BOUNDARY_TOL)
    switch = plus[:-1] != plus[1:]
    y_plus = np.where(plus[:-1], y[:-1], y[1:])
    return switch & (y_plus < 0.0)


def polyline_length(a, b, frame: str = "plane", ann: AnnulusPair = DEFAULT_PAIR) -> float:
    """Plane length, or torus length with chart-seam crossings left out."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size < 2:
        return 0.0
    if frame == "plane":
        return float(np.hypot(np.diff(a), np.diff(b)).sum())
    dx, dy = torus_delta(a[:-1], b[:-1], a[1:], b[1:])
    seg = np.hypot(dx, dy)
    return float(seg[~chart_jumps(a, b, ann)].sum())


def snap_into_annuli(u, v, ann: AnnulusPair = DEFAULT_PAIR):
    """Move points that fell just outside ``A`` radially onto the nearer annulus."""
    u = np.array(u, dtype=float)
    v = np.array(v, dtype=float)
    dp, dm = centre_distances(u, v)
    out = ~(ann.contains_radius(dp) | ann.contains_radius(dm))
    if np.any(out):
        gp = np.maximum(ann.r0 - dp, dp - ann.r1)
        gm = np.maximum(ann.r0 - dm, dm - ann.r1)
        use_p = out & (gp <= gm)
        use_m = out & ~use_p
        for mask, cx, d in ((use_p, -1.0, dp), (use_m, 1.0, dm)):
            if np.any(mask):
                scale = np.clip(d[mask], ann.r0, ann.r1) / d[mask]
                u[mask] = cx + (u[mask] - cx) * scale
                v[mask] = v[mask] * scale
    return u, v


def _to_plane(a, b, frame, ann):
    if frame == "torus":
        u, v = from_torus(a, b, ann)
        return np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


def _from_plane(u, v, frame, ann):
    if frame == "torus":
        x, y = to_torus(u, v, ann)
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return u, v


#: preimage gaps below this (plane distance) cannot be split further in double precision
MIN_SPLIT = 1e-14


def _midpoints(a, b, pu, pv, k, frame, ann):
    """Midpoints of segments ``k -> k+1`` in the native frame.

    On the torus, segments that cross the ``Sigma-`` seam, or whose midpoint
    falls outside ``R``, are split in the plane instead.
    """
    if frame != "torus":
        return snap_into_annuli(0.5 * (a[k] + a[k + 1]), 0.5 * (b[k] + b[k + 1]), ann)
    dx, dy = torus_delta(a[k], b[k], a[k + 1], b[k + 1])
    ma = wrap_angle(a[k] + 0.5 * dx)
    mb = wrap_angle(b[k] + 0.5 * dy)
    jump = chart_jumps(np.stack([a[k], a[k + 1]]), np.stack([b[k], b[k + 1]]), ann)[0]
    bad = jump | ~in_R(ma, mb, ann)
    if np.any(bad):
        mu, mv = snap_into_annuli(0.5 * (pu[k][bad] + pu[k + 1][bad]), 0.5 * (pv[k][bad] + pv[k + 1][bad]), ann)
        ma[bad], mb[bad] = _from_plane(mu, mv, frame, ann)
    return ma, mb


def iter_stretch(initial: CurveRecord, iters: int, map_name: str = "theta_plane",
                 refinement_tol: float | None = None, ann: AnnulusPair = DEFAULT_PAIR,
                 max_points: int = DEFAULT_POINT_BUDGET):
    """Yield ``(m, a, b)`` for ``m = 0..iters`` with adaptive refinement.

    When two consecutive images are more than ``refinement_tol`` apart in the
    plane, the midpoint of their preimages on the previous polyline is
    mapped and inserted.
    """
    tol = initial.refinement_tol if refinement_tol is None else refinement_tol
    if tol <= 0:
        raise ValueError("refinement_tol must be positive")
    fn = _map_fn(map_name, ann)
    frame = _frame_of(map_name, initial.frame)
    a = np.asarray(initial.a, dtype=float)
    b = np.asarray(initial.b, dtype=float)
    if a.size < 2:
        raise ValueError("a curve needs at least two vertices")
    if a.size > max_points:
        raise PointBudgetExceeded(f"initial curve has more than {max_points} points")
    yield 0, a, b
    for m in range(1, iters + 1):
        pa, pb = a, b
        pu, pv = _to_plane(pa, pb, frame, ann)
        a, b = (np.asarray(c, dtype=float) for c in fn(pa, pb))
        u, v = _to_plane(a, b, frame, ann)
        while True:
            gap = np.hypot(np.diff(u), np.diff(v)) > tol
            gap &= np.hypot(np.diff(pu), np.diff(pv)) > MIN_SPLIT
            if not np.any(gap):
                break
            k = np.flatnonzero(gap)
            if a.size + k.size > max_points:
                raise PointBudgetExceeded(
                    f"refinement needs more than {max_points} points at iterate {m}"
                )
            ma, mb = _midpoints(pa, pb, pu, pv, k, frame, ann)
            mu, mv = _to_plane(ma, mb, frame, ann)
            na, nb = (np.asarray(c, dtype=float) for c in fn(ma, mb))
            nu, nv = _to_plane(na, nb, frame, ann)
            pa, pb = np.insert(pa, k + 1, ma), np.insert(pb, k + 1, mb)
            pu, pv = np.insert(pu, k + 1, mu), np.insert(pv, k + 1, mv)
            a, b = np.insert(a, k + 1, na), np.insert(b, k + 1, nb)
            u, v = np.insert(u, k + 1, nu), np.insert(v, k + 1, nv)
        yield m, a, b


def stretch_curve(initial: CurveRecord, iters: int, map_name: str = "theta_plane",
                  refinement_tol: float | None = None, ann: AnnulusPair = DEFAULT_PAIR,
                  max_points: int = DEFAULT_POINT_BUDGET) -> CurveRecord:
    """Push a polyline forward ``iters`` times, recording its length after each iterate."""
    tol = initial.refinement_tol if refinement_tol is None else refinement_tol
    frame = _frame_of(map_name, initial.frame)
    lengths, plane = [], []
    a = b = None
    for _, a, b in iter_stretch(initial, iters, map_name, tol, ann, max_points):
        lengths.append(polyline_length(a, b, frame, ann))
        if frame == "torus":
            plane.append(polyline_length(*_to_plane(a, b, frame, ann)))
        else:
            plane.append(lengths[-1])
    return CurveRecord(a, b, lengths, tol, frame, plane)


# ---------------------------------------------------------------------------
# stable / unstable intersections in the covering lattice
# ---------------------------------------------------------------------------

@dataclass
class IntersectionResult:
    intersects: bool
    witness: tuple | None
    m: int
    n: int
    u_points: int = 0
    s_points: int = 0
    u_in_cone: bool = True
    s_in_cone: bool = True


def split_smooth(x, y, ann: AnnulusPair = DEFAULT_PAIR):
    """Split a torus polyline into pieces at chart-seam crossings."""
    x = np.asarray(x)
    y = np.asarray(y)
    cuts = np.flatnonzero(chart_jumps(x, y, ann)) + 1
    return [(px, py) for px, py in zip(np.split(x, cuts), np.split(y, cuts)) if px.size >= 2]


def chords_in_cone(x, y, cone: ConeId, ann: AnnulusPair = DEFAULT_PAIR, tol: float = 1e-9) -> bool:
    """Every chord of every smooth piece lies in ``cone`` (``|b1 b2| <= tol |w|^2`` counts)."""
    for px, py in split_smooth(x, y, ann):
        dx, dy = torus_delta(px[:-1], py[:-1], px[1:], py[1:])
        keep = np.hypot(dx, dy) > 0
        if not np.all(in_cone(dx[keep], dy[keep], cone, tol)):
            return False
    return True


def _lift_pieces(x, y, ann):
    return [lift_curve(px, py, ann=ann) for px, py in split_smooth(x, y, ann)]


def curves_intersect(ux, uy, sx, sy, ann: AnnulusPair = DEFAULT_PAIR):
    """Intersect two torus polylines through their lifts to the covering lattice.

    Each smooth piece is lifted continuously; the stable pieces are then
    translated by every ``2 pi (k, l)`` that makes bounding boxes overlap.
    Returns a witness point of ``R`` or ``None``.
    """
    from shapely import LineString
    from shapely.strtree import STRtree

    two_pi = 2.0 * math.pi
    u_lines = [LineString(np.column_stack(p)) for p in _lift_pieces(ux, uy, ann)]
    s_pieces = _lift_pieces(sx, sy, ann)
    if not u_lines or not s_pieces:
        return None
    tree = STRtree(u_lines)
    ub = np.array([ln.bounds for ln in u_lines])
    ulo = ub[:, :2].min(axis=0)
    uhi = ub[:, 2:].max(axis=0)
    for U, V in s_pieces:
        klo = math.floor((ulo[0] - U.max()) / two_pi)
        khi = math.ceil((uhi[0] - U.min()) / two_pi)
        llo = math.floor((ulo[1] - V.max()) / two_pi)
        lhi = math.ceil((uhi[1] - V.min()) / two_pi)
        for k in range(klo, khi + 1):
            for l in range(llo, lhi + 1):
                line = LineString(np.column_stack([U + two_pi * k, V + two_pi * l]))
                for j in tree.query(line, predicate="intersects"):
                    pt = u_lines[int(j)].intersection(line)
                    rep = pt.representative_point() if not pt.is_empty else None
                    if rep is not None:
                        px, py = project(rep.x, rep.y, ann)
                        return float(px), float(py)
    return None


def seed_segment(seed: int, ann: AnnulusPair = DEFAULT_PAIR, unstable: bool = True,
                 length: float = 1e-2):
    """Short torus segment along the estimated unstable (or stable) direction
    at a seeded start point.  Returns ``((x, y), CurveRecord)``."""
    rng = orbit_rng(seed, 0, 0)
    while True:
        x, y = draw_start(rng, ann, "torus", margin=1e-6)
        e1, e2 = estimate_direction(x, y, ann, unstable)
        p0 = (x - 0.5 * length * e1, y - 0.5 * length * e2)
        p1 = (x + 0.5 * length * e1, y + 0.5 * length * e2)
        seg = CurveRecord.segment(p0, p1, n=3, frame="torus")
        if np.all(in_R(seg.a, seg.b, ann)) and not np.any(chart_jumps(seg.a, seg.b, ann)):
            return (x, y), seg


def intersection_experiment(seed_u: int, seed_s: int, m: int, n: int, ann: AnnulusPair = DEFAULT_PAIR,
                            seg_length: float = 1e-2, refinement_tol: float = DEFAULT_REFINEMENT_TOL,
                            max_points: int = DEFAULT_POINT_BUDGET) -> IntersectionResult:
    """Test ``H^m(gamma_u) n H^-n(gamma_s) != {}`` for short seeded segments."""
    if m < 0 or n < 0:
        raise ValueError("m and n must be non-negative")
    _, gu = seed_segment(seed_u, ann, True, seg_length)
    _, gs = seed_segment(seed_s, ann, False, seg_length)
    cu = stretch_curve(gu, m, "h_torus", refinement_tol, ann, max_points)
    cs = stretch_curve(gs, n, "h_torus_inv", refinement_tol, ann, max_points)
    w = curves_intersect(cu.a, cu.b, cs.a, cs.b, ann)
    return IntersectionResult(w is not None, w, m, n, cu.a.size, cs.a.size,
                              chords_in_cone(cu.a, cu.b, ConeId.C, ann),
                              chords_in_cone(cs.a, cs.b, ConeId.CTilde, ann))


def minimal_intersection(seed_u: int, seed_s: int, bound: int = 20, ann: AnnulusPair = DEFAULT_PAIR,
                         seg_length: float = 1e-2, refinement_tol: float = DEFAULT_REFINEMENT_TOL,
                         max_points: int = DEFAULT_POINT_BUDGET) -> IntersectionResult:
    """First ``(m, n)`` found with ``H^m(gamma_u)`` meeting ``H^-n(gamma_s)``.

    Starts at ``m = n = 1`` and advances whichever curve is currently
    shorter (in the plane), so both grow at comparable lengths; each new
    pair is tested.  Returns ``intersects=False`` when both indices reach
    ``bound``; re-raises :class:`PointBudgetExceeded` if the budget stops
    the search first.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    _, gu = seed_segment(seed_u, ann, True, seg_length)
    _, gs = seed_segment(seed_s, ann, False, seg_length)
    gen_u = iter_stretch(gu, bound, "h_torus", refinement_tol, ann, max_points)
    gen_s = iter_stretch(gs, bound, "h_torus_inv", refinement_tol, ann, max_points)
    next(gen_u)
    next(gen_s)
    m, ua, ub = next(gen_u)
    n, sa, sb = next(gen_s)
    while True:
        w = curves_intersect(ua, ub, sa, sb, ann)
        if w is not None:
            return IntersectionResult(True, w, m, n, ua.size, sa.size,
                                      chords_in_cone(ua, ub, ConeId.C, ann),
                                      chords_in_cone(sa, sb, ConeId.CTilde, ann))
        if m >= bound and n >= bound:
            return IntersectionResult(False, None, m, n, ua.size, sa.size)
        lu = polyline_length(*_to_plane(ua, ub, "torus", ann))
        ls = polyline_length(*_to_plane(sa, sb, "torus", ann))
        if n >= bound or (m < bound and lu <= ls):
            m, ua, ub = next(gen_u)
        else:
            n, sa, sb = next(gen_s)


# ---------------------------------------------------------------------------
# coarse-grained mixing
# ---------------------------------------------------------------------------

def mixing_decay(cells: int = 64, iters: int = 20, samples: int = 10**6, seed: int = 0,
                 ann: AnnulusPair = DEFAULT_PAIR, map_name: str = "theta_plane") -> list[float]:
    """Variance of cell-averaged ``+-1`` field after each iterate.

    Sample points carry ``+1`` if they start left of ``u = 0`` and ``-1``
    otherwise; each iterate moves them by ``Theta``.  Cell means are taken
    over a ``cells x cells`` grid on the bounding box of ``A`` (empty cells
    skipped).
    """
    if cells < 16:
        raise ValueError("cells must be at least 16")
    if samples < 10**5:
        raise ValueError("samples must be at least 1e5")
    fn = _map_fn(map_name, ann)
    rng = orbit_rng(seed, 0, 0)
    u, v = sample_annuli(rng, samples, ann)
    val = np.where(u < 0.0, 1.0, -1.0)
    lo = np.array([-1.0 - ann.r1, -ann.r1])
    hi = np.array([1.0 + ann.r1, ann.r1])

    def variance(u, v):
        iu = np.clip(((u - lo[0]) / (hi[0] - lo[0]) * cells).astype(int), 0, cells - 1)
        iv = np.clip(((v - lo[1]) / (hi[1] - lo[1]) * cells).astype(int), 0, cells - 1)
        flat = iu * cells + iv
        cnt = np.bincount(flat, minlength=cells * cells)
        tot = np.bincount(flat, weights=val, minlength=cells * cells)
        occ = cnt > 0
        return float(np.var(tot[occ] / cnt[occ]))

    out = [variance(u, v)]
    for m in range(iters):
        u, v = fn(u, v)
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise NonFiniteAccumulation(f"non-finite sample position at iterate {m + 1}")
        out.append(variance(u, v))
    if not np.all(np.isfinite(out)):
        raise NonFiniteAccumulation("mixing variance became non-finite")
    return out
