"""Command-line driver: deterministic CSV/JSON artifacts for every computation.

Subcommands
-----------
verify   run the identity/residual suite (exit 1 on any failure)
flow     integrate the reduced evolution system from closed-form initial data
shoot    launch one instanton trajectory and classify it
scan     classify a parameter grid of boundary data (exit 3 if any cell
         is Undetermined)
bubble   rescaled-bubble convergence series over a sweep of x_1
energy   energy-current series over a sweep of x_1
export   tabulate a closed-form metric profile

Configuration is a flat ``key = value`` text file; command-line flags override
file values.  Artifacts embed the configuration hash and are byte-identical
for identical configurations; the side manifest additionally records tool
version and wall-clock time (and is excluded from the determinism guarantee).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analysis, geometries, hitchin, instantons, liealg, shooting
from . import coframes

USAGE_ERROR = 2
CHECK_FAILURE = 1
NONCONVERGENCE = 3


# ---------------------------------------------------------------------------
# config and artifact plumbing
# ---------------------------------------------------------------------------

def load_config(path: str | None) -> dict:
    cfg = {}
    if path is None:
        return cfg
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    for line_no, line in enumerate(p.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_no}: expected 'key = value'")
        k, v = (part.strip() for part in line.split("=", 1))
        cfg[k] = v
    return cfg


# keys that do not affect computed values (artifact determinism is stated
# with respect to the hash of the remaining, computational, keys)
_NON_COMPUTATIONAL = {"out", "threads"}


def config_hash(cfg: dict) -> str:
    canon = "\n".join(f"{k}={cfg[k]}" for k in sorted(cfg)
                      if k not in _NON_COMPUTATIONAL)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return "" if x is None else str(x)


def write_csv(path: Path, header: list, rows: list, cfg: dict):
    lines = [f"# config_hash={config_hash(cfg)}", ",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: dict, cfg: dict):
    payload = dict(payload)
    payload["config_hash"] = config_hash(cfg)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n")


def write_manifest(outdir: Path, cfg: dict, t_start: float, artifacts: list):
    manifest = {
        "tool": "g2lab",
        "version": __version__,
        "config": {k: str(v) for k, v in sorted(cfg.items())},
        "config_hash": config_hash(cfg),
        "wall_clock_s": time.time() - t_start,
        "artifacts": [a.name for a in artifacts],
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _outdir(cfg) -> Path:
    out = Path(cfg.get("out", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------

def _verify_checks(seed: int, perturb: bool):
    """Yield (name, margin, tolerance) for the full identity/residual suite."""
    rng = np.random.default_rng(seed)
    eps = 0.05 if perturb else 0.0

    s3 = coframes.s3xs3()
    sp2 = coframes.sp2()
    su3 = coframes.su3_flag()
    yield ("d^2 = 0 on the S3xS3 coframe", liealg.d_squared_max(s3), 1e-14)
    yield ("d^2 = 0 on the Sp(2) coframe", liealg.d_squared_max(sp2), 1e-14)
    yield ("d^2 = 0 on the SU(3) coframe", liealg.d_squared_max(su3), 1e-14)

    se = coframes.sasaki_einstein_forms(s3)
    al, w1, w2, w3, ei = (se[k] for k in ("alpha", "omega1", "omega2", "omega3", "eta_infty"))
    yield ("d alpha = -2 omega_1", (liealg.d_invariant(al) + 2.0 * w1).max_abs(), 1e-12)
    yield ("d omega_2 = 3 alpha ^ omega_3",
           (liealg.d_invariant(w2) + (-3.0) * liealg.wedge(al, w3)).max_abs(), 1e-12)
    yield ("d omega_3 = -3 alpha ^ omega_2",
           (liealg.d_invariant(w3) + 3.0 * liealg.wedge(al, w2)).max_abs(), 1e-12)
    dei = liealg.d_invariant(ei)
    yield ("d eta_infty ^ omega_i = 0",
           max((liealg.wedge(dei, w)).max_abs() for w in (w1, w2, w3)), 1e-12)

    worst_c = worst_v = 0.0
    for _ in range(20):
        st = geometries.SU3StructureState(tuple(rng.uniform(0.5, 2.0, 3)),
                                          tuple(rng.uniform(0.5, 2.0, 3)))
        om, g1, g2 = geometries.su3_forms(st)
        worst_c = max(worst_c, liealg.wedge(om, g2).max_abs())
        om3 = liealg.wedge(liealg.wedge(om, om), om)
        worst_v = max(worst_v, (om3 + (-1.5) * liealg.wedge(g1, g2)).max_abs())
    yield ("omega ^ gamma_2 = 0 on random states", worst_c, 1e-10)
    yield ("omega^3 = (3/2) gamma_1 ^ gamma_2 on random states", worst_v, 1e-10)

    for prof, name, lo in ((geometries.BSCanonicalProfile(), "spinor-bundle", 1.0 + 1e-4),
                           (geometries.BGGGCanonicalProfile(), "ALC", 2.25 + 1e-4)):
        worst = 0.0
        for x in np.geomspace(lo, lo + 40.0, 50):
            st = prof.state_at_coord(x)
            if perturb:
                st = geometries.SU3StructureState(
                    (st.A[0] + eps, st.A[1], st.A[2]), st.B, st.dA, st.dB)
            worst = max(worst, max(hitchin.torsion_residual_state(st)))
        yield (f"torsion-free {name} metric (50 samples)", worst, 1e-9)

    prof = geometries.BSCanonicalProfile()
    rs = np.geomspace(1.001, 30.0, 20)

    def cres(make):
        worst = 0.0
        for r in rs:
            st = prof.state_at_coord(r)
            v, d = make(r)
            res = instantons.instanton_residual(v, d, st, "su2cubed")
            worst = max(worst, res["psi_residual"])
        return worst

    for x1 in (0.1, 1.0, 10.0):
        yield (f"closed-form irreducible instanton, x1 = {x1}",
               cres(lambda r: ((instantons.clarke_closed_form(x1, r)[0] + eps, 0.0),
                               (instantons.clarke_closed_form(x1, r)[1], 0.0))), 1e-9)
    yield ("closed-form limit instanton",
           cres(lambda r: ((instantons.alim_x_of_r(r)[0] + eps, 0.0),
                           (instantons.alim_x_of_r(r)[1], 0.0))), 1e-9)

    worst = 0.0
    for r in rs:
        st = prof.state_at_coord(r)
        A = instantons.abelian_bs_form((0.4, -0.3, 0.8), r)
        res = instantons.instanton_residual(None, None, st, "su2cubed", connection=A)
        worst = max(worst, res["psi_residual"])
    yield ("abelian family on the spinor bundle", worst, 1e-9)

    pb = geometries.BGGGCanonicalProfile()
    worst = 0.0
    for r in np.geomspace(2.26, 30.0, 20):
        st = pb.state_at_coord(r)
        A = instantons.abelian_bggg_form((0.7, 0.0, 0.0), r)
        res = instantons.instanton_residual(None, None, st, "su2cubed", connection=A)
        worst = max(worst, res["psi_residual"])
    yield ("abelian family on the ALC metric (x2 = x3 = 0)", worst, 1e-9)

    for space, label in (("lambda2-s4", "S^4 bundle"), ("lambda2-cp2", "CP^2 bundle")):
        worst = 0.0
        for sgn in (1.0, -1.0):
            for s in np.linspace(0.1, 5.0, 20):
                d = instantons.lambda2_instantons(space, s, sgn)
                worst = max(worst, d["psi_residual"] + (eps if perturb else 0.0),
                            abs(d["constraint"]), abs(d["ode_residual"]))
        yield (f"closed-form instanton on the {label} (both signs)", worst, 1e-9)

    spin = instantons.spin_connection_curvature()
    s4 = geometries.lambda2_structure("lambda2-s4", 1.3)
    yield ("lifted spin connection: curvature form", spin["deviation"], 1e-12)
    yield ("lifted spin connection: instanton residual",
           instantons.wedge_residual(spin["curvature"], s4), 1e-12)


def cmd_verify(cfg) -> int:
    t_start = time.time()
    outdir = _outdir(cfg)
    seed = int(cfg.get("seed", 0))
    perturb = str(cfg.get("perturb", "false")).lower() in ("1", "true", "yes")
    checks, failed = [], 0
    for name, margin, tolerance in _verify_checks(seed, perturb):
        ok = margin <= tolerance
        failed += not ok
        checks.append({"check": name, "margin": margin, "tolerance": tolerance,
                       "pass": bool(ok)})
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {margin:.3e} (tol {tolerance:g})")
    report = {"checks": checks, "failed": failed, "seed": seed, "perturb": perturb}
    path = outdir / "verify.json"
    write_json(path, report, cfg)
    write_manifest(outdir, cfg, t_start, [path])
    return CHECK_FAILURE if failed else 0


# ---------------------------------------------------------------------------
# flow / shoot / scan
# ---------------------------------------------------------------------------

def _profile(cfg):
    name = str(cfg.get("metric", "bs"))
    try:
        return geometries.profile_by_name(name, c=float(cfg.get("c", 1.0)),
                                          lam=float(cfg.get("lam", 1.0)))
    except ValueError as exc:
        raise SystemExit(_usage(str(exc)))


def _usage(msg: str) -> int:
    print(f"usage error: {msg}", file=sys.stderr)
    return USAGE_ERROR


def cmd_flow(cfg) -> int:
    t_start = time.time()
    outdir = _outdir(cfg)
    prof = _profile(cfg)
    r0 = float(cfg.get("r0", prof.coord_start + 0.5))
    r1 = float(cfg.get("r1", prof.coord_start + 4.0))
    tol = float(cfg.get("tol", 1e-11))
    t0, t1 = prof.t_of_coord(r0), prof.t_of_coord(r1)
    traj = hitchin.integrate_flow(prof.state_at_coord(r0), t0, t1, tol=tol)
    dphi, dpsi = hitchin.torsion_residual(traj)
    rows = []
    for i, t in enumerate(traj.t):
        st = traj.states[i]
        rows.append([t, *st.A, *st.B, dphi[i], dpsi[i]])
    path = outdir / "flow.csv"
    write_csv(path, ["t[arclength]", "A1", "A2", "A3", "B1", "B2", "B3",
                     "dphi_resid", "dpsi_resid"], rows, cfg)
    write_manifest(outdir, cfg, t_start, [path])
    if traj.truncated:
        return NONCONVERGENCE
    return 0


def _boundary_from_cfg(cfg) -> instantons.BoundaryData:
    family = str(cfg.get("metric", "bggg"))
    if family not in ("bs", "bggg"):
        raise SystemExit(_usage(f"shooting needs metric bs or bggg, not {family!r}"))
    bundle = str(cfg.get("bundle", "p1"))
    if family == "bs":
        params = ((float(cfg.get("x1", 1.0)),) if bundle == "p1"
                  else (float(cfg.get("y0", 0.0)),))
    else:
        params = ((float(cfg.get("f1p", 1.0)), float(cfg.get("g1p", 0.25)))
                  if bundle == "p1" else (float(cfg.get("b0m", 0.0)),))
    return instantons.BoundaryData(family, bundle, params)


def cmd_shoot(cfg) -> int:
    t_start = time.time()
    outdir = _outdir(cfg)
    data = _boundary_from_cfg(cfg)
    tol = float(cfg.get("tol", 1e-10))
    tmax = cfg.get("tmax")
    traj, cls = shooting.shoot(data, t_max=float(tmax) if tmax else None, tol=tol)
    rows = []
    for i, t in enumerate(traj.t):
        st = traj.state(i)
        res = instantons.instanton_residual(traj.values[i], traj.derivs[i], st, traj.system)
        rows.append([t, traj.coords[i], *traj.values[i],
                     res["psi_residual"], res["curvature_norm"] ** 2])
    names = ["x", "y"] if traj.system == "su2cubed" else ["f+", "g+", "f-", "g-"]
    path = outdir / "trajectory.csv"
    write_csv(path, ["t[arclength]", "r[coordinate]", *names,
                     "instanton_resid", "F_norm_sq"], rows, cfg)
    report = {"boundary": {"family": data.family, "bundle": data.bundle,
                           "params": list(data.params)},
              "verdict": cls.verdict, "curvature_sup": cls.curvature_sup,
              "t_blow": cls.t_blow, "asymptote": cls.asymptote,
              "reason": cls.reason, "tolerance": tol}
    jpath = outdir / "classification.json"
    write_json(jpath, report, cfg)
    write_manifest(outdir, cfg, t_start, [path, jpath])
    return 0 if cls.verdict != "Undetermined" else NONCONVERGENCE


def cmd_scan(cfg) -> int:
    t_start = time.time()
    outdir = _outdir(cfg)
    family = str(cfg.get("metric", "bggg"))
    tol = float(cfg.get("tol", 1e-9))
    n = int(cfg.get("grid", 20))
    threads = int(cfg.get("threads", 1))
    tmax = cfg.get("tmax")
    tmax = float(tmax) if tmax else None
    if family == "bs":
        x1s = np.linspace(float(cfg.get("x1_min", 0.0)), float(cfg.get("x1_max", 10.0)), n)
        cells = shooting.scan_bs_x1(x1s, t_max=tmax, tol=tol)
        rows = [[c["x1"], c["verdict"], c["curvature_sup"], c["c_inf"]] for c in cells]
        path = outdir / "scan.csv"
        write_csv(path, ["x1", "verdict", "curvature_sup", "c_inf"], rows, cfg)
        report = {"cells": cells}
        undetermined = any(c["verdict"] == "Undetermined" for c in cells)
    else:
        lo = float(cfg.get("grid_min", 0.0))
        hi = float(cfg.get("grid_max", 2.0))
        grid = np.linspace(lo, hi, n)
        rep = shooting.scan(grid, grid, t_max=tmax, tol=tol, processes=threads)
        rows = [[c["f1"], c["g1"], c["region"], c["verdict"], c["curvature_sup"],
                 c["c_inf"], c["holonomy"]] for c in rep.cells]
        path = outdir / "scan.csv"
        write_csv(path, ["f1p", "g1p", "region", "verdict", "curvature_sup",
                         "c_inf", "holonomy[rad]"], rows, cfg)
        report = {"summary": rep.summary,
                  "open_region_cells": [c for c in rep.cells if c["region"] == "open"]}
        undetermined = any(c["verdict"] == "Undetermined" for c in rep.cells)
    jpath = outdir / "scan.json"
    write_json(jpath, report, cfg)
    write_manifest(outdir, cfg, t_start, [path, jpath])
    return NONCONVERGENCE if undetermined else 0


# ---------------------------------------------------------------------------
# bubble / energy / export
# ---------------------------------------------------------------------------

def _sweep(cfg):
    raw = str(cfg.get("x1_sweep", "100,1000,10000"))
    return [float(x) for x in raw.split(",") if x.strip()]


def cmd_bubble(cfg) -> int:
    t_start = time.time()
    outdir = _outdir(cfg)
    lam = float(cfg.get("lam", 1.0))
    rows = []
    for x1 in _sweep(cfg):
        bp = analysis.rescale_bubble(x1, lam)
        rows.append([x1, bp.sup_distance, bp.delta])
    path = outdir / "bubble.csv"
    write_csv(path, ["x1", "sup_distance", "delta"], rows, cfg)
    write_manifest(outdir, cfg, t_start, [path])
    sups = [r[1] for r in rows]
    return 0 if all(b < a * 1.05 for a, b in zip(sups, sups[1:])) else NONCONVERGENCE


def cmd_energy(cfg) -> int:
    t_start = time.time()
    outdir = _outdir(cfg)
    radius = float(cfg.get("ball_radius", 3.0))
    target = analysis.energy_target()
    rows = []
    for x1 in _sweep(cfg):
        val = analysis.energy_current(x1, ("ball", radius))
        rows.append([x1, val, target, val / target])
    path = outdir / "energy.csv"
    write_csv(path, ["x1", "energy", "target[8pi^2 VolS3]", "ratio"], rows, cfg)
    write_manifest(outdir, cfg, t_start, [path])
    ratios = [abs(r[3] - 1.0) for r in rows]
    return 0 if all(b <= a * 1.05 for a, b in zip(ratios, ratios[1:])) else NONCONVERGENCE


def cmd_export(cfg) -> int:
    t_start = time.time()
    outdir = _outdir(cfg)
    prof = _profile(cfg)
    n = int(cfg.get("grid", 100))
    lo = prof.coord_start + float(cfg.get("offset", 1e-3))
    hi = float(cfg.get("coord_max", prof.coord_start + 20.0))
    rows = []
    for x in np.geomspace(lo, hi, n):
        st = prof.state_at_coord(x)
        rows.append([prof.t_of_coord(x), x, *st.A, *st.B])
    path = outdir / "profile.csv"
    write_csv(path, [f"t[arclength]", f"{prof.coord}[coordinate]",
                     "A1", "A2", "A3", "B1", "B2", "B3"], rows, cfg)
    write_manifest(outdir, cfg, t_start, [path])
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_DEFAULTS = {
    "verify": {"out": "out", "seed": 0, "perturb": None},
    "flow": {"out": "out", "metric": "bs", "r0": None, "r1": None, "tol": None},
    "shoot": {"out": "out", "metric": "bggg", "bundle": "p1", "x1": None, "y0": None,
              "f1p": None, "g1p": None, "b0m": None, "tol": None, "tmax": None},
    "scan": {"out": "out", "metric": "bggg", "grid": 20, "grid_min": None,
             "grid_max": None, "x1_min": None, "x1_max": None, "tol": None,
             "tmax": None, "threads": 1},
    "bubble": {"out": "out", "x1_sweep": None, "lam": None},
    "energy": {"out": "out", "x1_sweep": None, "ball_radius": None},
    "export": {"out": "out", "metric": "bs", "grid": 100, "coord_max": None,
               "offset": None},
}


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="g2lab",
                                  description="cohomogeneity-one G2 laboratory")
    sub = top.add_subparsers(dest="command", required=True)
    for name, defaults in _DEFAULTS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key = value file")
        for key in defaults:
            flag = "--" + key.replace("_", "-")
            if key in ("grid", "threads", "seed"):
                p.add_argument(flag, type=int, default=None)
            elif key in ("metric", "bundle", "out", "x1_sweep", "perturb"):
                p.add_argument(flag, type=str, default=None)
            else:
                p.add_argument(flag, type=float, default=None)
    return top


_COMMANDS = {"verify": cmd_verify, "flow": cmd_flow, "shoot": cmd_shoot,
             "scan": cmd_scan, "bubble": cmd_bubble, "energy": cmd_energy,
             "export": cmd_export}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        cfg = {k: v for k, v in _DEFAULTS[args.command].items() if v is not None}
        cfg.update(load_config(getattr(args, "config", None)))
        for key in _DEFAULTS[args.command]:
            val = getattr(args, key.replace("-", "_"), None)
            if val is not None:
                cfg[key] = val
    except (ValueError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        return _COMMANDS[args.command](cfg)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except (ValueError, FileNotFoundError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except RuntimeError as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
