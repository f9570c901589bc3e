"""Grid certification of the derivative ranges, condition (W) and the
``(r0, r1)`` parameter sweep.

Certification here means dense sampling plus one level of local refinement,
not interval arithmetic.  Grids are cell-centred on each smooth piece of the
quantity's domain, so no sample sits on a seam.  Refinement splits a cell
into 3 x 3 sub-cells; the sub-cell centres of an ``n`` grid are nodes of the
``3n`` grid, so the observed range can only widen as ``n`` grows by factors
of three.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._parallel import parallel_map
from .bipolar import to_torus
from .cones import (
    SEAM_TOL,
    ConeId,
    _f_with_jacobian,
    _psi_inv_partials,
    _psi_partials,
    h_with_jacobian,
    in_cone,
)
from .errors import DegenerateTriangle, DomainError
from .geometry import (
    DEFAULT_PAIR,
    SQRT7,
    AnnulusPair,
    is_admissible,
    region_boundaries,
    sample_annuli,
)

PI = math.pi
REFINE = 3
NEAR_EXTREMUM = 0.01


@dataclass(frozen=True)
class Claim:
    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def contains(self, val, slack: float = 0.0):
        val = np.asarray(val)
        ok_lo = val > self.lo - slack if self.lo_open else val >= self.lo - slack
        ok_hi = val < self.hi + slack if self.hi_open else val <= self.hi + slack
        return ok_lo & ok_hi


#: claimed ranges for the default pair ``(2, sqrt 7)``; psi ranges are for ``theta >= 0``
CLAIMS = {
    "D1psi": Claim(0.0, 7.0 / 6.0, hi_open=True),
    "D2psi": Claim(0.25, SQRT7),
    "D1psiInv": Claim(-9.0 / 11.0, 0.0),
    "D2psiInv": Claim(SQRT7 / 7.0, 4.0),
    "D1fPlus": Claim(0.0, math.inf),
    "D1fMinusNeg": Claim(0.0, math.inf),
    "D2f": Claim(0.0, math.inf),
    "D1psiInner": Claim(0.0, 72.0 * PI / (150.0 * math.sqrt(2.0)), hi_open=True),
    "D1psiSigma": Claim(SQRT7 / 7.0, 5.0 * SQRT7 / 14.0),
    "D1psiOuter": Claim(0.0, 5.0 * math.sqrt(3.0) / 9.0, hi_open=True),
}
PRIMARY_QUANTITIES = ("D1psi", "D2psi", "D1psiInv", "D2psiInv", "D1fPlus", "D1fMinusNeg", "D2f")
REGION_QUANTITIES = ("D1psiInner", "D1psiSigma", "D1psiOuter")
QUANTITIES = PRIMARY_QUANTITIES + REGION_QUANTITIES


@dataclass
class BoundReport:
    quantity: str
    claimed_lo: float
    claimed_hi: float
    observed_lo: float
    observed_hi: float
    grid: tuple
    refined: bool
    verdict: str
    witness: tuple | None = None
    argmin: tuple | None = None
    argmax: tuple | None = None
    samples: int = 0

    @property
    def within_claim(self) -> bool:
        return self.verdict == "WithinClaim"

    @property
    def slack_lo(self) -> float:
        return self.observed_lo - self.claimed_lo

    @property
    def slack_hi(self) -> float:
        return self.claimed_hi - self.observed_hi

    def row(self) -> dict:
        d = asdict(self)
        d["grid"] = f"{self.grid[0]}x{self.grid[1]}"
        d["slack_lo"] = self.slack_lo
        d["slack_hi"] = self.slack_hi
        for k in ("witness", "argmin", "argmax"):
            v = d[k]
            d[k] = "" if v is None else f"{v[0]!r};{v[1]!r}"
        return d


# ---------------------------------------------------------------------------
# smooth pieces: unit square (s, t) -> domain point (a, b)
# ---------------------------------------------------------------------------

def _psi_piece(which):
    def to_domain(s, t, ann):
        r = ann.r0 + s * (ann.r1 - ann.r0)
        ti, to = region_boundaries(r, ann)
        if which == "inner":
            th = ti * t
        elif which == "sigma":
            th = ti + (to - ti) * t
        else:
            th = to + (PI - to) * t
        return r, th
    return to_domain


def _rect_piece(blo, bhi):
    def to_domain(s, t, ann):
        lo = blo(ann) if callable(blo) else blo
        hi = bhi(ann) if callable(bhi) else bhi
        return ann.r0 + s * (ann.r1 - ann.r0), lo + (hi - lo) * t
    return to_domain


def _d1psi(a, b, ann):
    return _psi_partials(a, b, ann)[0]


def _d2psi(a, b, ann):
    return _psi_partials(a, b, ann)[1]


def _d1psi_inv(a, b, ann):
    return _psi_inv_partials(a, b, ann)[0]


def _d2psi_inv(a, b, ann):
    return _psi_inv_partials(a, b, ann)[1]


def _f_entry(inverse, entry, sign=1.0):
    def ev(a, b, ann):
        _, _, a21, a22, seam = _f_with_jacobian(a, b, ann, inverse)
        val = sign * (a21 if entry == "a21" else a22)
        return np.where(seam < SEAM_TOL, np.nan, val)
    return ev


_PSI_PIECES = [_psi_piece(w) for w in ("inner", "sigma", "outer")]
_PSI_INV_PIECES = [
    _rect_piece(0.0, lambda ann: ann.r0),
    _rect_piece(lambda ann: ann.r0, lambda ann: ann.r1),
    _rect_piece(lambda ann: ann.r1, PI),
]
_FULL = _rect_piece(-PI, PI)

_PIECES = {
    "D1psi": [(p, _d1psi) for p in _PSI_PIECES],
    "D2psi": [(p, _d2psi) for p in _PSI_PIECES],
    "D1psiInv": [(p, _d1psi_inv) for p in _PSI_INV_PIECES],
    "D2psiInv": [(p, _d2psi_inv) for p in _PSI_INV_PIECES],
    "D1fPlus": [(_FULL, _f_entry(False, "a21"))],
    "D1fMinusNeg": [(_FULL, _f_entry(True, "a21", -1.0))],
    "D2f": [(_FULL, _f_entry(False, "a22")), (_FULL, _f_entry(True, "a22"))],
    "D1psiInner": [(_PSI_PIECES[0], _d1psi)],
    "D1psiSigma": [(_PSI_PIECES[1], _d1psi)],
    "D1psiOuter": [(_PSI_PIECES[2], _d1psi)],
}


def _evaluate_piece(to_domain, ev, s, t, ann):
    a, b = to_domain(s, t, ann)
    return a, b, np.asarray(ev(a, b, ann), dtype=float)


def sample_quantity(quantity: str, ann: AnnulusPair = DEFAULT_PAIR, grid_n: int = 512,
                    refine: bool = True):
    """All samples of ``quantity``: returns arrays ``(a, b, value, refined_mask)``."""
    if quantity not in _PIECES:
        raise ValueError(f"unknown quantity {quantity!r}; expected one of {QUANTITIES}")
    c = (np.arange(grid_n) + 0.5) / grid_n
    S, T = np.meshgrid(c, c, indexing="ij")
    coarse = []
    for to_domain, ev in _PIECES[quantity]:
        a, b, val = _evaluate_piece(to_domain, ev, S.ravel(), T.ravel(), ann)
        coarse.append((to_domain, ev, a, b, val))
    allv = np.concatenate([x[4] for x in coarse])
    finite = np.isfinite(allv)
    if not np.any(finite):
        raise DomainError(f"{quantity}: no finite samples")
    lo, hi = float(allv[finite].min()), float(allv[finite].max())
    band = NEAR_EXTREMUM * (hi - lo)
    A, B, V, R = [], [], [], []
    offs = (np.arange(REFINE) - (REFINE - 1) / 2.0) / (REFINE * grid_n)
    for to_domain, ev, a, b, val in coarse:
        A.append(a)
        B.append(b)
        V.append(val)
        R.append(np.zeros(val.size, dtype=bool))
        if not refine:
            continue
        near = np.isfinite(val) & ((val >= hi - band) | (val <= lo + band))
        if not np.any(near):
            continue
        cs, ct = S.ravel()[near], T.ravel()[near]
        ds, dt = np.meshgrid(offs, offs, indexing="ij")
        keep = (ds.ravel() != 0.0) | (dt.ravel() != 0.0)
        rs = (cs[:, None] + ds.ravel()[keep][None, :]).ravel()
        rt = (ct[:, None] + dt.ravel()[keep][None, :]).ravel()
        ra, rb, rv = _evaluate_piece(to_domain, ev, rs, rt, ann)
        A.append(ra)
        B.append(rb)
        V.append(rv)
        R.append(np.ones(rv.size, dtype=bool))
    return np.concatenate(A), np.concatenate(B), np.concatenate(V), np.concatenate(R)


def certify_bound(quantity: str, ann: AnnulusPair = DEFAULT_PAIR, grid_n: int = 512,
                  refine: bool = True) -> BoundReport:
    """Sample ``quantity`` densely and compare with its claimed range.

    A Violation is reported only if it survives refinement: some refined
    sample (not just the coarse cell centre) is also outside the claim by
    more than rounding.
    """
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    if not isinstance(ann, AnnulusPair):
        raise DomainError("certify_bound needs an AnnulusPair")
    claim = CLAIMS[quantity]
    a, b, v, refined = sample_quantity(quantity, ann, grid_n, refine)
    ok = np.isfinite(v)
    a, b, v, refined = a[ok], b[ok], v[ok], refined[ok]
    imin, imax = int(np.argmin(v)), int(np.argmax(v))
    noise = 64 * np.finfo(float).eps * np.maximum(1.0, np.abs(v))
    outside = ~claim.contains(v, slack=0.0) & ~claim.contains(v, slack=noise)
    confirmed = outside & refined if refine else outside
    verdict, witness = "WithinClaim", None
    if np.any(confirmed):
        k = int(np.flatnonzero(confirmed)[np.argmax(np.abs(v[confirmed]))])
        verdict, witness = "Violation", (float(a[k]), float(b[k]))
    return BoundReport(
        quantity=quantity,
        claimed_lo=claim.lo,
        claimed_hi=claim.hi,
        observed_lo=float(v[imin]),
        observed_hi=float(v[imax]),
        grid=(grid_n, grid_n),
        refined=bool(refine),
        verdict=verdict,
        witness=witness,
        argmin=(float(a[imin]), float(b[imin])),
        argmax=(float(a[imax]), float(b[imax])),
        samples=int(v.size),
    )


# ---------------------------------------------------------------------------
# condition (W)
# ---------------------------------------------------------------------------

def cos_alpha(x, y):
    """Cosine of the angle at a ``Sigma`` point opposite the segment joining the centres."""
    x = np.asarray(x, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    return (x * x + y * y - 4.0) / (2.0 * x * y)


def cot_alpha(x, y, ann: AnnulusPair = DEFAULT_PAIR, tol: float = 1e-12):
    """``cot alpha`` at a torus point of ``S``; ``y`` enters through ``|y|``."""
    xa = np.asarray(x, dtype=float)
    ya = np.abs(np.asarray(y, dtype=float))
    if not np.all(ann.contains_radius(xa, tol) & ann.contains_radius(ya, tol)):
        raise DomainError("cot_alpha needs (x, |y|) in I x I")
    ca = cos_alpha(xa, ya)
    if np.any(np.abs(ca) >= 1.0):
        raise DegenerateTriangle("|cos alpha| >= 1: the point and the centres are collinear")
    out = ca / np.sqrt(1.0 - ca * ca)
    return float(out) if out.ndim == 0 else out


def w_threshold(ann: AnnulusPair = DEFAULT_PAIR, mode: str = "fixed") -> float:
    """Right-hand side of the sufficient form of condition (W).

    ``fixed`` is ``pi / (sqrt 7 - 2)``; ``scaled`` is ``c / 2 = pi / (r1 - r0)``,
    which agrees with ``fixed`` for the default pair.
    """
    if mode == "fixed":
        return PI / (SQRT7 - 2.0)
    if mode == "scaled":
        return ann.c / 2.0
    raise ValueError(f"unknown threshold mode {mode!r}")


@dataclass
class ConditionWReport:
    sup_cot: float
    threshold: float
    holds: bool
    argmax: tuple
    alpha_min: float
    alpha_max: float
    corner_is_argmax: bool
    grid: int
    threshold_mode: str = "fixed"
    r0: float = field(default=math.nan)
    r1: float = field(default=math.nan)


def check_condition_w(ann: AnnulusPair = DEFAULT_PAIR, grid_n: int = 1024,
                      threshold_mode: str = "fixed") -> ConditionWReport:
    """Maximise ``cot alpha`` over ``I x I`` on an endpoint-inclusive grid."""
    if not is_admissible(ann.r0, ann.r1):
        raise DomainError(f"inadmissible annuli ({ann.r0}, {ann.r1})")
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    g = np.linspace(ann.r0, ann.r1, grid_n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    ca = cos_alpha(X, Y)
    if np.any(np.abs(ca) >= 1.0):
        raise DegenerateTriangle("grid contains a degenerate triangle")
    cot = ca / np.sqrt(1.0 - ca * ca)
    k = np.unravel_index(int(np.argmax(cot)), cot.shape)
    alpha = np.arccos(ca)
    sup = float(cot[k])
    thr = w_threshold(ann, threshold_mode)
    return ConditionWReport(
        sup_cot=sup,
        threshold=thr,
        holds=bool(sup < thr),
        argmax=(float(X[k]), float(Y[k])),
        alpha_min=float(alpha.min()),
        alpha_max=float(alpha.max()),
        corner_is_argmax=bool(k == (grid_n - 1, grid_n - 1)),
        grid=grid_n,
        threshold_mode=threshold_mode,
        r0=ann.r0,
        r1=ann.r1,
    )


# ---------------------------------------------------------------------------
# (r0, r1) sweep
# ---------------------------------------------------------------------------

@dataclass
class SweepCell:
    i: int
    j: int
    r0: float
    r1: float
    admissible: bool
    min_D1f_plus: float = math.nan
    max_D1f_minus: float = math.nan
    sup_cot_alpha: float = math.nan
    w_condition_holds: bool | None = None
    cone_condition_holds: bool | None = None


def cone_condition(ann: AnnulusPair, grid_n: int = 128):
    """``(min D1f+, max D1f-)`` over an endpoint-inclusive grid of ``[r0, r1] x [0, pi]``."""
    x = np.linspace(ann.r0, ann.r1, grid_n)
    y = np.linspace(0.0, PI, grid_n)
    X, Y = np.meshgrid(x, y, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    _, _, ap, _, sp = _f_with_jacobian(X, Y, ann, False)
    _, _, am, _, sm = _f_with_jacobian(X, Y, ann, True)
    ap = ap[sp >= SEAM_TOL]
    am = am[sm >= SEAM_TOL]
    return float(ap.min()), float(am.max())


def _sweep_cell(args):
    i, j, r0, r1, grid_n, w_grid, mode = args
    if not (r1 > r0 and is_admissible(r0, r1)):
        return SweepCell(i, j, r0, r1, False)
    ann = AnnulusPair(r0, r1)
    w = check_condition_w(ann, w_grid, mode)
    mn, mx = cone_condition(ann, grid_n)
    return SweepCell(i, j, r0, r1, True, mn, mx, w.sup_cot, w.holds, bool(mn >= 0.0 and mx <= 0.0))


def parameter_sweep(cells: int = 32, grid_n: int = 128, threads: int = 1,
                    threshold_mode: str = "fixed", lo: float = 2.0, hi: float = SQRT7,
                    w_grid: int = 64) -> list[SweepCell]:
    """Condition (W) and the cone condition on a ``cells x cells`` lattice of ``(r0, r1)``.

    Lattice nodes include the corners, so ``(2, sqrt 7)`` is a cell.  Cells
    with ``r1 <= r0`` (or otherwise inadmissible) are returned with
    ``admissible=False``.  Output order is row-major in ``(i, j)``.
    """
    if cells < 4:
        raise ValueError("cells must be at least 4")
    g = np.linspace(lo, hi, cells)
    jobs = [(i, j, float(g[i]), float(g[j]), grid_n, w_grid, threshold_mode)
            for i in range(cells) for j in range(cells)]
    return parallel_map(_sweep_cell, jobs, threads)


# ---------------------------------------------------------------------------
# cone invariance fuzzing
# ---------------------------------------------------------------------------

@dataclass
class ConeFuzzReport:
    samples: int
    seam_skipped: int
    dh_violations: int
    df_plus_violations: int
    df_minus_violations: int
    d2f_violations: int
    witness: tuple | None = None

    @property
    def holds(self) -> bool:
        return (self.dh_violations + self.df_plus_violations + self.df_minus_violations
                + self.d2f_violations) == 0


def fuzz_cone_invariance(samples: int = 10**6, seed: int = 0, ann: AnnulusPair = DEFAULT_PAIR,
                         batch: int = 10**5, tol: float = 1e-14) -> ConeFuzzReport:
    """Random ``(z, w)`` with ``w`` in ``C(z)``: check ``DH_z w`` in ``C`` and the signs of ``DF``.

    Points are uniform in ``A`` mapped to ``R``; those within the seam
    tolerance anywhere along the chain are redrawn.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0xC0E,))))
    done = skipped = dh_bad = fp_bad = fm_bad = d2_bad = 0
    witness = None
    while done < samples:
        n = min(batch, samples - done)
        u, v = sample_annuli(rng, n, ann)
        x, y = to_torus(u, v, ann)
        _, _, J, seam = h_with_jacobian(x, y, ann)
        _, _, ap, dp, sp = _f_with_jacobian(x, y, ann, False)
        _, _, am, dm, sm = _f_with_jacobian(x, y, ann, True)
        ok = (seam >= SEAM_TOL) & (sp >= SEAM_TOL) & (sm >= SEAM_TOL)
        skipped += int(np.count_nonzero(~ok))
        ang = rng.uniform(0.0, PI / 2, n)
        sgn = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        b1, b2 = sgn * np.cos(ang), sgn * np.sin(ang)
        c1 = J.a11 * b1 + J.a12 * b2
        c2 = J.a21 * b1 + J.a22 * b2
        bad = ok & ~in_cone(c1, c2, ConeId.C, tol)
        if witness is None and np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            witness = (float(x[k]), float(y[k]), float(b1[k]), float(b2[k]))
        dh_bad += int(np.count_nonzero(bad))
        fp_bad += int(np.count_nonzero(ok & (ap < 0.0)))
        fm_bad += int(np.count_nonzero(ok & (am > 0.0)))
        d2_bad += int(np.count_nonzero(ok & ((dp < 0.0) | (dm < 0.0))))
        done += int(np.count_nonzero(ok))
    return ConeFuzzReport(done, skipped, dh_bad, fp_bad, fm_bad, d2_bad, witness)
