"""Command-line front end.

    ltlab iterate   [--map theta] [--n 1] [--input pts.csv | --generator segment]
    ltlab verify    {bounds, condition-w, cones, sweep}
    ltlab diagnose  {lyapunov, alignment, stretch, intersect, mixing}
    ltlab replay    MANIFEST

Options may be given on the command line, in a flat JSON ``--config`` file,
or left at their defaults, in that order of precedence.  Every run writes
its CSV/JSON outputs plus a ``<command>.manifest.json`` into the output
directory (``--out-dir``, else ``$LTL_OUT_DIR``, else ``ltl_out``).

Exit codes: 0 success, 1 claim violated, 2 usage or input error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import certify, diagnostics
from ._parallel import parallel_map
from .bipolar import from_torus, to_torus
from .errors import DomainError, NumericalFailure, SeamEncounter
from .geometry import SQRT7, AnnulusPair, in_annuli, sample_annuli
from .records import RunManifest, write_csv, write_json
from .torus import h_map
from .twist import MapId, apply_map

log = logging.getLogger("ltlab")

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_OUT_DIR = "ltl_out"
PLANE_MAPS = ("phi", "phi-inv", "gamma", "gamma-inv", "theta", "theta-inv")


class UsageError(Exception):
    """Bad input detected after argument parsing (exit code 2)."""


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

GLOBAL_DEFAULTS = {"r0": 2.0, "r1": SQRT7, "seed": 0, "threads": 1, "out_dir": None, "config": None}


class _Builder:
    """Adds options with suppressed argparse defaults and records the real ones."""

    def __init__(self):
        self.defaults: dict[str, dict] = {}

    def leaf(self, sub, name, help, key):
        p = sub.add_parser(name, help=help, argument_default=argparse.SUPPRESS)
        _add_globals(p)
        p.set_defaults(_key=key)
        self.defaults[key] = {}
        return p

    def opt(self, p, key, *flags, default=None, **kw):
        action = p.add_argument(*flags, **kw)
        self.defaults[key][action.dest] = default
        return action


def _add_globals(p):
    g = p.add_argument_group("global options")
    g.add_argument("--r0", type=float, help="inner radius of both annuli (default 2)")
    g.add_argument("--r1", type=float, help="outer radius of both annuli (default sqrt 7)")
    g.add_argument("--seed", type=int, help="run seed (default 0)")
    g.add_argument("--threads", type=int, help="worker threads (default 1)")
    g.add_argument("--out-dir", help="output directory (default $LTL_OUT_DIR or ./ltl_out)")
    g.add_argument("--config", help="flat JSON file of option values")


def build_parser():
    b = _Builder()
    parser = argparse.ArgumentParser(
        prog="ltlab", description="Linked-twist map experiments and certifications.",
        argument_default=argparse.SUPPRESS,
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    _add_globals(parser)
    top = parser.add_subparsers(dest="command", required=True)

    # iterate
    p = b.leaf(top, "iterate", "iterate points under a map", "iterate")
    b.opt(p, "iterate", "--map", default="theta", choices=PLANE_MAPS)
    b.opt(p, "iterate", "--n", type=int, default=1, help="number of iterates")
    b.opt(p, "iterate", "--frame", default="plane", choices=("plane", "torus"))
    b.opt(p, "iterate", "--input", default=None, help="CSV with header u,v")
    b.opt(p, "iterate", "--generator", default="segment", choices=("segment", "grid", "random"))
    b.opt(p, "iterate", "--n-points", type=int, default=200)
    b.opt(p, "iterate", "--figure", default=None, choices=("planar-twist",))

    # verify
    vp = top.add_parser("verify", help="certify claims").add_subparsers(dest="sub", required=True)
    p = b.leaf(vp, "bounds", "derivative range certification", "verify bounds")
    b.opt(p, "verify bounds", "--grid", type=int, default=512)
    b.opt(p, "verify bounds", "--with-regions", action="store_true", default=False,
          help="also certify the three per-region ranges of D1 psi")
    b.opt(p, "verify bounds", "--no-refine", dest="no_refine", action="store_true", default=False)
    p = b.leaf(vp, "condition-w", "sup cot alpha against its threshold", "verify condition-w")
    b.opt(p, "verify condition-w", "--grid", type=int, default=1024)
    b.opt(p, "verify condition-w", "--threshold", default="fixed", choices=("fixed", "scaled"))
    p = b.leaf(vp, "cones", "fuzz cone invariance of DH", "verify cones")
    b.opt(p, "verify cones", "--samples", type=int, default=10**6)
    p = b.leaf(vp, "sweep", "(r0, r1) parameter sweep", "verify sweep")
    b.opt(p, "verify sweep", "--cells", type=int, default=32)
    b.opt(p, "verify sweep", "--grid", type=int, default=128)
    b.opt(p, "verify sweep", "--threshold", default="fixed", choices=("fixed", "scaled"))

    # diagnose
    dp = top.add_parser("diagnose", help="ergodic diagnostics").add_subparsers(dest="sub", required=True)
    p = b.leaf(dp, "lyapunov", "Lyapunov exponents", "diagnose lyapunov")
    b.opt(p, "diagnose lyapunov", "--orbits", type=int, default=10)
    b.opt(p, "diagnose lyapunov", "--steps", type=int, default=10**4)
    b.opt(p, "diagnose lyapunov", "--burn-in", type=int, default=diagnostics.DEFAULT_BURN_IN)
    b.opt(p, "diagnose lyapunov", "--frame", default="plane", choices=("plane", "torus"))
    p = b.leaf(dp, "alignment", "cone alignment of pushed vectors", "diagnose alignment")
    b.opt(p, "diagnose alignment", "--orbits", type=int, default=10)
    b.opt(p, "diagnose alignment", "--steps", type=int, default=10**4)
    b.opt(p, "diagnose alignment", "--burn-in", type=int, default=diagnostics.DEFAULT_BURN_IN)
    b.opt(p, "diagnose alignment", "--inverse", action="store_true", default=False,
          help="transport by DH^-1 and test the cone C~")
    b.opt(p, "diagnose alignment", "--initial", default="random", choices=("random", "cone"))
    p = b.leaf(dp, "stretch", "material line stretching", "diagnose stretch")
    b.opt(p, "diagnose stretch", "--iters", type=int, default=10)
    b.opt(p, "diagnose stretch", "--map", default="h_torus", choices=("theta_plane", "h_torus"))
    b.opt(p, "diagnose stretch", "--tol", type=float, default=diagnostics.DEFAULT_REFINEMENT_TOL)
    b.opt(p, "diagnose stretch", "--seg-length", type=float, default=1e-6)
    b.opt(p, "diagnose stretch", "--max-points", type=int, default=diagnostics.DEFAULT_POINT_BUDGET)
    p = b.leaf(dp, "intersect", "unstable/stable curve intersections", "diagnose intersect")
    b.opt(p, "diagnose intersect", "--pairs", type=int, default=20)
    b.opt(p, "diagnose intersect", "--bound", type=int, default=1000)
    b.opt(p, "diagnose intersect", "--seg-length", type=float, default=1e-2)
    b.opt(p, "diagnose intersect", "--tol", type=float, default=diagnostics.DEFAULT_REFINEMENT_TOL)
    p = b.leaf(dp, "mixing", "decay of a coarse-grained field", "diagnose mixing")
    b.opt(p, "diagnose mixing", "--cells", type=int, default=64)
    b.opt(p, "diagnose mixing", "--iters", type=int, default=20)
    b.opt(p, "diagnose mixing", "--samples", type=int, default=10**6)
    b.opt(p, "diagnose mixing", "--control", action="store_true", default=False,
          help="also run the identity map as a control column")

    # replay
    p = top.add_parser("replay", help="re-run a command from its manifest",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("manifest")
    p.add_argument("--out-dir")
    p.set_defaults(_key="replay")
    return parser, b.defaults


def resolve(ns: argparse.Namespace, defaults: dict) -> dict:
    """Merge command-line values over config-file values over defaults."""
    given = {k: v for k, v in vars(ns).items() if k not in ("_key", "command", "sub", "verbose")}
    key = ns._key
    params = dict(GLOBAL_DEFAULTS)
    params.update(defaults.get(key, {}))
    cfg_path = given.get("config")
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise UsageError("config must be a flat JSON object")
        for k, v in cfg.items():
            dest = k.lstrip("-").replace("-", "_")
            if dest not in params:
                raise UsageError(f"config key {k!r} is not an option of {key!r}")
            params[dest] = v
    params.update(given)
    if params.get("input"):
        # manifests must replay from any working directory
        params["input"] = str(Path(params["input"]).resolve())
    return params


def _out_dir(params) -> Path:
    return Path(params.get("out_dir") or os.environ.get("LTL_OUT_DIR") or DEFAULT_OUT_DIR)


def _annuli(params) -> AnnulusPair:
    try:
        return AnnulusPair(float(params["r0"]), float(params["r1"]))
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# iterate
# ---------------------------------------------------------------------------

def _in_a(u, v, ann):
    plus, minus = in_annuli(u, v, ann)
    return plus | minus


def read_points(path, ann: AnnulusPair):
    """Read a ``u,v`` CSV; raises UsageError with the offending line number."""
    us, vs = [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["u", "v"]:
            raise UsageError(f"{path}:1: expected header 'u,v'")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise UsageError(f"{path}:{line}: expected 2 fields, got {len(row)}")
            try:
                u, v = float(row[0]), float(row[1])
            except ValueError as exc:
                raise UsageError(f"{path}:{line}: {exc}") from exc
            if not (math.isfinite(u) and math.isfinite(v)):
                raise UsageError(f"{path}:{line}: non-finite coordinate")
            if not _in_a(u, v, ann):
                raise UsageError(f"{path}:{line}: point ({u}, {v}) is outside A")
            us.append(u)
            vs.append(v)
    if not us:
        raise UsageError(f"{path}: no points")
    return np.array(us), np.array(vs)


def segment_points(n: int, ann: AnnulusPair):
    """Horizontal line ``v = 0`` across ``A+``: both sides of its hole."""
    n_left = (n + 1) // 2
    left = np.linspace(-1.0 - ann.r1, -1.0 - ann.r0, n_left)
    right = np.linspace(-1.0 + ann.r0, -1.0 + ann.r1, n - n_left)
    u = np.concatenate([left, right])
    return u, np.zeros_like(u)


def generate_points(kind: str, n: int, seed: int, ann: AnnulusPair):
    if n < 1:
        raise UsageError("--n-points must be positive")
    if kind == "segment":
        return segment_points(n, ann)
    if kind == "random":
        return sample_annuli(diagnostics.orbit_rng(seed), n, ann)
    side = max(2, int(math.ceil(math.sqrt(n))))
    while True:
        g = np.linspace(-1.0 - ann.r1, 1.0 + ann.r1, side)
        U, V = np.meshgrid(g, np.linspace(-ann.r1, ann.r1, side), indexing="ij")
        keep = _in_a(U.ravel(), V.ravel(), ann)
        if keep.sum() >= n or side > 10 * n:
            return U.ravel()[keep][:n], V.ravel()[keep][:n]
        side += 1


def _map_points(name, u, v, n, frame, ann):
    """Orbit rows ``(iterate, a, b)`` for ``n`` iterates."""
    if frame == "torus":
        if name not in ("theta", "theta-inv"):
            raise UsageError("--frame torus supports --map theta or theta-inv")
        a, b = to_torus(u, v, ann)
        step = lambda a, b: h_map(a, b, ann, inverse=(name == "theta-inv"))  # noqa: E731
    else:
        a, b = u, v
        mid = MapId(name)
        step = lambda a, b: apply_map(mid, a, b, ann)  # noqa: E731
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    rows = []
    for k in range(n + 1):
        if k:
            a, b = (np.atleast_1d(np.asarray(c, dtype=float)) for c in step(a, b))
        rows.extend((k, x, y) for x, y in zip(a.tolist(), b.tolist()))
    return rows


def cmd_iterate(params, out: Path):
    ann = _annuli(params)
    outputs = []
    if params["figure"] == "planar-twist":
        u, v = segment_points(params["n_points"], ann)
        pu, pv = apply_map(MapId.Phi, u, v, ann)
        tu, tv = apply_map(MapId.Theta, u, v, ann)
        for name, a, b in (("planar_twist_a_initial.csv", u, v),
                           ("planar_twist_b_phi.csv", pu, pv),
                           ("planar_twist_c_theta.csv", tu, tv)):
            outputs.append(write_csv(out / name, ["u", "v"], zip(a.tolist(), b.tolist())))
        return outputs, EXIT_OK
    if params["n"] < 0:
        raise UsageError("--n must be non-negative")
    if params["input"]:
        u, v = read_points(params["input"], ann)
    else:
        u, v = generate_points(params["generator"], params["n_points"], params["seed"], ann)
    rows = _map_points(params["map"], u, v, params["n"], params["frame"], ann)
    cols = ["iterate", "x", "y"] if params["frame"] == "torus" else ["iterate", "u", "v"]
    outputs.append(write_csv(out / "iterate.csv", cols, rows))
    return outputs, EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

BOUND_COLUMNS = ["quantity", "claimed_lo", "claimed_hi", "observed_lo", "observed_hi", "slack_lo",
                 "slack_hi", "grid", "refined", "samples", "verdict", "witness", "argmin", "argmax"]


def cmd_verify_bounds(params, out: Path):
    ann = _annuli(params)
    names = list(certify.PRIMARY_QUANTITIES)
    if params["with_regions"]:
        names += list(certify.REGION_QUANTITIES)
    job = lambda q: certify.certify_bound(q, ann, params["grid"], not params["no_refine"])  # noqa: E731
    reports = parallel_map(job, names, params["threads"])
    rows = [r.row() for r in reports]
    outputs = [write_csv(out / "bounds.csv", BOUND_COLUMNS, rows),
               write_json(out / "bounds.json", {"reports": rows,
                                                "all_within_claim": all(r.within_claim for r in reports)})]
    code = EXIT_OK
    for r in reports:
        print(f"{r.quantity:12s} [{r.observed_lo:.6g}, {r.observed_hi:.6g}] "
              f"claim [{r.claimed_lo:.6g}, {r.claimed_hi:.6g}] {r.verdict}")
        if not r.within_claim:
            print(f"  witness: {r.witness}")
            code = EXIT_VIOLATION
    return outputs, code


def cmd_verify_condition_w(params, out: Path):
    ann = _annuli(params)
    rep = certify.check_condition_w(ann, params["grid"], params["threshold"])
    d = dict(vars(rep))
    outputs = [write_json(out / "condition_w.json", d),
               write_csv(out / "condition_w.csv", list(d), [d])]
    print(f"sup cot alpha = {rep.sup_cot:.12g} at {rep.argmax}; threshold = {rep.threshold:.12g}; "
          f"alpha in [{rep.alpha_min:.9g}, {rep.alpha_max:.9g}]; holds = {rep.holds}")
    return outputs, EXIT_OK if rep.holds else EXIT_VIOLATION


def cmd_verify_cones(params, out: Path):
    ann = _annuli(params)
    rep = certify.fuzz_cone_invariance(params["samples"], params["seed"], ann)
    d = dict(vars(rep))
    d["holds"] = rep.holds
    outputs = [write_json(out / "cones.json", d)]
    print(f"{rep.samples} samples: DH violations {rep.dh_violations}, "
          f"D1f+ < 0: {rep.df_plus_violations}, D1f- > 0: {rep.df_minus_violations}, "
          f"D2f < 0: {rep.d2f_violations}")
    if not rep.holds:
        print(f"  witness (x, y, b1, b2): {rep.witness}")
    return outputs, EXIT_OK if rep.holds else EXIT_VIOLATION


SWEEP_COLUMNS = ["i", "j", "r0", "r1", "admissible", "min_D1f_plus", "max_D1f_minus",
                 "sup_cot_alpha", "w_condition_holds", "cone_condition_holds"]


def cmd_verify_sweep(params, out: Path):
    cells = certify.parameter_sweep(params["cells"], params["grid"], params["threads"],
                                    params["threshold"])
    rows = [vars(c) for c in cells]
    adm = [c for c in cells if c.admissible]
    summary = {
        "cells": params["cells"],
        "admissible": len(adm),
        "w_condition_all": all(c.w_condition_holds for c in adm),
        "cone_condition_all": all(c.cone_condition_holds for c in adm),
        "w_condition_failures": [[c.r0, c.r1] for c in adm if not c.w_condition_holds],
        "cone_condition_failures": [[c.r0, c.r1] for c in adm if not c.cone_condition_holds],
    }
    outputs = [write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows),
               write_json(out / "sweep.json", summary)]
    print(f"{len(adm)} admissible cells; condition (W) holds on all: {summary['w_condition_all']}; "
          f"cone condition holds on all: {summary['cone_condition_all']}")
    return outputs, EXIT_OK if summary["w_condition_all"] else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# diagnose
# ---------------------------------------------------------------------------

def cmd_lyapunov(params, out: Path):
    ann = _annuli(params)
    ests = diagnostics.lyapunov_orbits(params["seed"], params["orbits"], params["steps"],
                                       params["burn_in"], ann, params["frame"],
                                       threads=params["threads"])
    rows = [(e.orbit, e.attempt, e.lambda1, e.lambda2, e.lambda1 + e.lambda2, e.start[0], e.start[1])
            for e in ests]
    cols = ["orbit", "attempt", "lambda1", "lambda2", "sum", "a0", "b0"]
    outputs = [write_csv(out / "lyapunov.csv", cols, rows)]
    l1 = np.array([e.lambda1 for e in ests])
    print(f"{len(ests)} orbits: lambda1 min {l1.min():.6g}, mean {l1.mean():.6g}, max {l1.max():.6g}")
    return outputs, EXIT_OK


def cmd_alignment(params, out: Path):
    ann = _annuli(params)
    res = diagnostics.alignment_orbits(params["seed"], params["orbits"], params["steps"],
                                       params["burn_in"], ann, params["inverse"], params["initial"],
                                       threads=params["threads"])
    frac = "fraction_in_Ctilde" if params["inverse"] else "fraction_in_C"
    cols = ["orbit", "attempt", "direction", frac]
    rows = [(r.orbit, r.attempt, r.direction, r.fraction) for r in res]
    outputs = [write_csv(out / "alignment.csv", cols, rows)]
    print(f"{len(res)} orbits: min fraction in {res[0].cone} = {min(r.fraction for r in res):.6g}")
    return outputs, EXIT_OK


def cmd_stretch(params, out: Path):
    ann = _annuli(params)
    frame = "torus" if params["map"] == "h_torus" else "plane"
    _, seg = diagnostics.seed_segment(params["seed"], ann, True, params["seg_length"])
    if frame == "plane":
        u, v = from_torus(seg.a, seg.b, ann)
        seg = diagnostics.CurveRecord(np.asarray(u), np.asarray(v), [], params["tol"], "plane")
    rec = diagnostics.stretch_curve(seg, params["iters"], params["map"], params["tol"], ann,
                                    params["max_points"])
    rows = [(m, L, P) for m, (L, P) in enumerate(zip(rec.lengths_per_iterate, rec.plane_lengths))]
    outputs = [write_csv(out / "stretch_lengths.csv", ["iterate", "length", "plane_length"], rows),
               write_csv(out / "stretch_curve.csv", ["x", "y"] if frame == "torus" else ["u", "v"],
                         zip(rec.a.tolist(), rec.b.tolist()))]
    print(f"length {rec.lengths_per_iterate[0]:.6g} -> {rec.lengths_per_iterate[-1]:.6g} "
          f"after {params['iters']} iterates ({rec.a.size} points)")
    return outputs, EXIT_OK


def intersection_seeds(seed: int, k: int):
    """Seeds of the unstable and stable segments of pair ``k``."""
    s = np.random.SeedSequence(seed, spawn_key=(0x15EC, k)).generate_state(2)
    return int(s[0]), int(s[1])


def cmd_intersect(params, out: Path):
    ann = _annuli(params)

    def job(k):
        su, ss = intersection_seeds(params["seed"], k)
        r = diagnostics.minimal_intersection(su, ss, params["bound"], ann, params["seg_length"],
                                             params["tol"])
        w = r.witness or (math.nan, math.nan)
        return (k, su, ss, r.intersects, r.m, r.n, w[0], w[1], r.u_points, r.s_points,
                r.u_in_cone, r.s_in_cone)

    rows = parallel_map(job, range(params["pairs"]), params["threads"])
    cols = ["pair", "seed_u", "seed_s", "intersects", "m", "n", "witness_x", "witness_y",
            "u_points", "s_points", "u_in_cone", "s_in_cone"]
    outputs = [write_csv(out / "intersect.csv", cols, rows)]
    hit = sum(r[3] for r in rows)
    worst = max((max(r[4], r[5]) for r in rows if r[3]), default=0)
    print(f"{hit}/{len(rows)} pairs intersect; largest index needed {worst} (bound {params['bound']})")
    return outputs, EXIT_OK


def cmd_mixing(params, out: Path):
    ann = _annuli(params)
    var = diagnostics.mixing_decay(params["cells"], params["iters"], params["samples"],
                                   params["seed"], ann)
    cols = ["iterate", "variance"]
    data = [list(range(len(var))), var]
    if params["control"]:
        cols.append("variance_identity")
        data.append(diagnostics.mixing_decay(params["cells"], params["iters"], params["samples"],
                                             params["seed"], ann, map_name="identity"))
    outputs = [write_csv(out / "mixing.csv", cols, zip(*data))]
    print(f"variance {var[0]:.6g} -> {var[-1]:.6g} after {params['iters']} iterates")
    return outputs, EXIT_OK


HANDLERS = {
    "iterate": cmd_iterate,
    "verify bounds": cmd_verify_bounds,
    "verify condition-w": cmd_verify_condition_w,
    "verify cones": cmd_verify_cones,
    "verify sweep": cmd_verify_sweep,
    "diagnose lyapunov": cmd_lyapunov,
    "diagnose alignment": cmd_alignment,
    "diagnose stretch": cmd_stretch,
    "diagnose intersect": cmd_intersect,
    "diagnose mixing": cmd_mixing,
}


def manifest_name(command: str) -> str:
    return command.replace(" ", "-") + ".manifest.json"


def run(command: str, params: dict) -> int:
    """Run a resolved command, write its manifest, return the exit code."""
    out = _out_dir(params)
    t0 = time.perf_counter()
    outputs, code = HANDLERS[command](params, out)
    stored = {k: v for k, v in params.items() if k not in ("out_dir", "config")}
    man = RunManifest(command=command, parameters=stored, seed=int(params["seed"]),
                      outputs=[Path(p).name for p in outputs],
                      wall_time_s=time.perf_counter() - t0, exit_code=code)
    man.write(out / manifest_name(command))
    return code


def replay(manifest_path, out_dir=None) -> int:
    man = RunManifest.read(manifest_path)
    if man.command not in HANDLERS:
        raise UsageError(f"unknown command {man.command!r} in manifest")
    params = dict(GLOBAL_DEFAULTS)
    params.update(man.parameters)
    params["out_dir"] = out_dir or str(Path(manifest_path).resolve().parent)
    return run(man.command, params)


def main(argv=None) -> int:
    parser, defaults = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * getattr(ns, "verbose", 0),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if ns._key == "replay":
            return replay(ns.manifest, getattr(ns, "out_dir", None))
        params = resolve(ns, defaults)
        if params["threads"] < 1:
            raise UsageError("--threads must be at least 1")
        return run(ns._key, params)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"ltlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SeamEncounter as exc:
        print(f"ltlab: {exc}\n  every re-seed met a seam; re-run with a different --seed",
              file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalFailure as exc:
        print(f"ltlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
