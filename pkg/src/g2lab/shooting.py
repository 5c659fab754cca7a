"""Shooting from singular-orbit data and global classification.

A trajectory is launched from the series expansion at a small t0, integrated
with an adaptive high-order Runge-Kutta method alongside the radial
coordinate of the background metric, and classified:

* CurvatureUnbounded -- a connection coefficient passed the hard cap, or the
  pointwise curvature norm exceeded 1e6 times its value at t = 1;
* GlobalBounded -- the curvature norm decreases over the final decade and the
  invariant connection coefficients go Cauchy to a constant limit;
* Abelian -- the reducible g_1^+ = 0 pattern on the ALC metric, verified
  against the closed-form U(1) family;
* Undetermined -- anything else (including everything that is still in
  transition when t_max is reached).

The 20 x 20 scan over (f_1^+, g_1^+) reproduces the existence and
non-existence regions of the ALC moduli space; the open strip
0 < f_1^+ - 1/2 < g_1^+ < f_1^+ between them is reported separately.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import geometries, instantons, liealg
from .geometries import BGGGCanonicalProfile, BSCanonicalProfile, MetricProfile
from .instantons import (A_INFTY_COEFF, BoundaryData, InstantonTrajectory,
                         connection_form, instanton_residual, rhs_for,
                         series_start)
from .series import bggg_metric_series, bs_metric_series

__all__ = [
    "Classification",
    "ScanReport",
    "shoot",
    "scan",
    "scan_bs_x1",
    "decay_fit",
    "holonomy_at_infinity",
    "HOLONOMY_PERIOD",
    "bggg_region",
    "COEFF_CAP",
    "CURVATURE_RATIO_CAP",
]

# blow-up thresholds (scale-robust: the unbounded branch grows exponentially)
COEFF_CAP = 1.0e8
CURVATURE_RATIO_CAP = 1.0e6
# tail-variation threshold for the Cauchy test on connection coefficients
TAIL_VARIATION = 1.0e-6
# holonomy normalisation: Hol = exp(kappa c_inf T_1) with kappa = 2 pi, so the
# abelian family x_1 |-> x_1 + 1 wraps U(1) exactly once
HOLONOMY_PERIOD = 1.0


@dataclass
class Classification:
    verdict: str                     # GlobalBounded | CurvatureUnbounded | Abelian | Undetermined
    curvature_sup: float
    t_blow: float | None = None
    asymptote: tuple | None = None   # limiting invariant coefficients
    reason: str = ""

    def __post_init__(self):
        if self.verdict not in ("GlobalBounded", "CurvatureUnbounded", "Abelian", "Undetermined"):
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if (self.t_blow is not None) != (self.verdict == "CurvatureUnbounded"):
            raise ValueError("t_blow must be present exactly for CurvatureUnbounded")
        if (self.asymptote is not None) != (self.verdict in ("GlobalBounded", "Abelian")):
            raise ValueError("asymptote must be present exactly for bounded verdicts")


@dataclass
class ScanReport:
    family: str
    f1_values: np.ndarray
    g1_values: np.ndarray
    cells: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _default_profile(family: str) -> MetricProfile:
    return BSCanonicalProfile() if family == "bs" else BGGGCanonicalProfile()


def _initial_radius(family: str, t0: float) -> float:
    met = bs_metric_series(10) if family == "bs" else bggg_metric_series(10)
    start = 1.0 if family == "bs" else 2.25
    return start + met["u"](t0)


def shoot(data: BoundaryData, profile: MetricProfile | None = None,
          t_max: float | None = None, tol: float = 1e-10,
          n_samples: int = 160, order: int = 5):
    """Integrate an instanton branch from its singular-orbit series.

    Returns (InstantonTrajectory, Classification).  The background radial
    coordinate is integrated alongside the connection variables, so the
    metric functions are evaluated in closed form at every step.
    """
    prof = profile if profile is not None else _default_profile(data.family)
    if t_max is None:
        t_max = 200.0 * prof.orbit_scale
    start = series_start(data, order=order)
    t0 = min(start.suggest_t0(1e-12), 0.05 * prof.orbit_scale)
    v0 = start.values(t0)
    r0 = _initial_radius(data.family, t0)
    rhs = rhs_for(start.system)
    nv = len(v0)

    def odefun(t, yv):
        st = prof.state_at_coord(max(yv[nv], prof.coord_start * (1 + 1e-15)))
        dv = rhs(yv[:nv], st)
        return np.append(dv, 1.0 / prof.dt_dcoord(yv[nv]))

    def blow_event(t, yv):
        return COEFF_CAP - np.max(np.abs(yv[:nv]))
    blow_event.terminal = True
    blow_event.direction = -1

    # atol well below rtol: exponentially decaying components must stay clean
    # near zero, or tail extrapolation sees amplified integrator noise
    sol = solve_ivp(odefun, (t0, t_max), np.append(v0, r0), method="DOP853",
                    rtol=tol, atol=tol * 1e-4, dense_output=True, events=blow_event)
    blown = bool(sol.t_events[0].size)
    t_end = sol.t[-1]
    ts = np.geomspace(t0 * 2.0, t_end, n_samples)
    ts[-1] = t_end
    ys = sol.sol(ts)
    vals = ys[:nv].T
    coords = np.maximum(ys[nv], prof.coord_start)
    states = [prof.state_at_coord(c) for c in coords]
    ders = np.array([rhs(v, st) for v, st in zip(vals, states)])
    traj = InstantonTrajectory(ts, vals, ders, coords, start.system, prof,
                               bundle=data.bundle, blown_up=blown,
                               blow_time=t_end if blown else None, dense=sol.sol)
    cls = classify(traj, data, t_max)
    return traj, cls


def _coefficients(traj: InstantonTrajectory, i: int) -> np.ndarray:
    """Invariant connection coefficients (the A_i x-type products) at sample i."""
    st = traj.state(i)
    v = traj.values[i]
    if traj.system == "su2cubed":
        return np.array([st.A[0] * v[0], st.B[0] * v[1]])
    return np.array([st.A[0] * v[0], st.A[1] * v[1], st.B[0] * v[2], st.B[1] * v[3]])


def curvature_norms(traj: InstantonTrajectory, idx=None) -> np.ndarray:
    """Pointwise |F_A| at the requested samples (default: all)."""
    idx = range(len(traj.t)) if idx is None else idx
    out = []
    for i in idx:
        st = traj.state(i)
        res = instanton_residual(traj.values[i], traj.derivs[i], st, traj.system)
        out.append(res["curvature_norm"])
    return np.array(out)


def _coefficients_at_time(traj: InstantonTrajectory, t: float) -> np.ndarray:
    yv = traj.dense(t)
    st = traj.profile.state_at_coord(max(yv[-1], traj.profile.coord_start))
    v = yv[:-1]
    if traj.system == "su2cubed":
        return np.array([st.A[0] * v[0], st.B[0] * v[1]])
    return np.array([st.A[0] * v[0], st.A[1] * v[1], st.B[0] * v[2], st.B[1] * v[3]])


def limit_coefficients(traj: InstantonTrajectory):
    """Richardson estimates of the limiting invariant coefficients.

    Connection coefficients on these backgrounds approach their limits with
    metric-induced drifts of order t^-2 and t^-3, so the limit is read off by
    fitting c(t) = c_inf + a/t^2 + b/t^3 through (t_end, t_end/2, t_end/4)
    and, as a consistency estimate, through the triple shifted down by one
    octave.
    """
    te = traj.t[-1]
    pts = [te, te / 2.0, te / 4.0, te / 8.0]
    cs = [_coefficients_at_time(traj, t) for t in pts]

    def extrapolate(ts, vals):
        M = np.array([[1.0, t ** -2, t ** -3] for t in ts])
        sol = np.linalg.solve(M, np.stack(vals))
        return sol[0]

    extr1 = extrapolate(pts[:3], cs[:3])
    extr2 = extrapolate(pts[1:], cs[1:])
    return extr1, extr2


def classify(traj: InstantonTrajectory, data: BoundaryData, t_max: float) -> Classification:
    """Apply the verdict rules to an integrated trajectory."""
    n = len(traj.t)
    idx = sorted(set(np.linspace(0, n - 1, 48).astype(int)))
    Fn = curvature_norms(traj, idx)
    tsel = traj.t[idx]
    sup = float(np.max(Fn))
    i1 = int(np.argmin(np.abs(tsel - 1.0)))
    F1 = max(Fn[i1], 1e-300)

    if traj.blown_up or sup > CURVATURE_RATIO_CAP * F1:
        return Classification("CurvatureUnbounded", sup, t_blow=float(traj.t[-1]),
                              reason="coefficient cap" if traj.blown_up else "curvature ratio")

    if traj.t[-1] < 0.99 * t_max:
        return Classification("Undetermined", sup, reason="integration stopped early")

    tail = tsel >= tsel[-1] / 10.0
    Ftail = Fn[tail]
    decreasing = bool(np.all(Ftail[1:] <= Ftail[:-1] * (1.0 + 1e-3)))

    extr1, extr2 = limit_coefficients(traj)
    variation = float(np.max(np.abs(extr1 - extr2)))
    cauchy = variation < TAIL_VARIATION * (1.0 + float(np.max(np.abs(extr1))))

    if decreasing and cauchy:
        verdict = "GlobalBounded"
        if data.family == "bggg" and data.bundle == "p1" and data.params[1] == 0.0:
            # reducible pattern: compare against the closed-form U(1) family
            x1 = 2.0 * data.params[0]
            dev = 0.0
            for t in (traj.t[-1], traj.t[-1] / 2.0):
                yv = traj.dense(t)
                st = traj.profile.state_at_coord(yv[-1])
                dev = max(dev, abs(yv[0] - x1 * st.A[0]))
            if dev <= 1e-8 * (1.0 + abs(x1)):
                verdict = "Abelian"
        return Classification(verdict, sup, asymptote=tuple(extr1))
    return Classification("Undetermined", sup,
                          reason=f"decreasing={decreasing} cauchy={cauchy} "
                                 f"variation={variation:.2e}")


# ---------------------------------------------------------------------------
# region bookkeeping for the ALC scan
# ---------------------------------------------------------------------------

def bggg_region(f1: float, g1: float, margin: float = 0.0) -> str:
    """Classify boundary data against the theorem regions (g1 >= 0).

    "bounded"    : f1 >= 1/2 + g1 > 1/2 (strictly inside by ``margin``),
    "unbounded"  : irreducible data with f1 <= 1/2 or g1 >= f1,
    "abelian"    : g1 = 0,
    "open"       : the strip 0 < f1 - 1/2 < g1 < f1,
    "boundary"   : within ``margin`` of a dividing line.
    """
    g = abs(g1)
    if g == 0.0:
        return "abelian"
    near = (abs(f1 - 0.5) <= margin or abs(f1 - 0.5 - g) <= margin
            or abs(g - f1) <= margin or g <= margin)
    if near:
        return "boundary"
    if f1 - g >= 0.5:
        return "bounded"
    if f1 <= 0.5 or g >= f1:
        return "unbounded"
    return "open"


def _scan_cell(args):
    f1, g1, t_max, tol = args
    data = BoundaryData("bggg", "p1", (f1, g1))
    traj, cls = shoot(data, t_max=t_max, tol=tol)
    c_inf = cls.asymptote[0] if cls.asymptote is not None else None
    hol = holonomy_angle_from_coefficient(c_inf) if c_inf is not None else None
    return {"f1": f1, "g1": g1, "verdict": cls.verdict,
            "curvature_sup": cls.curvature_sup,
            "t_blow": cls.t_blow, "c_inf": c_inf, "holonomy": hol,
            "reason": cls.reason}


def scan(f1_values, g1_values, t_max: float | None = None, tol: float = 1e-9,
         processes: int = 1) -> ScanReport:
    """Cell-parallel classification over a (f_1^+, g_1^+) grid on the ALC metric."""
    f1_values = np.asarray(f1_values, dtype=float)
    g1_values = np.asarray(g1_values, dtype=float)
    prof = BGGGCanonicalProfile()
    if t_max is None:
        t_max = 200.0 * prof.orbit_scale
    jobs = [(float(f1), float(g1), t_max, tol) for f1 in f1_values for g1 in g1_values]
    if processes > 1:
        with ProcessPoolExecutor(max_workers=processes) as ex:
            cells = list(ex.map(_scan_cell, jobs, chunksize=4))
    else:
        cells = [_scan_cell(j) for j in jobs]

    margin = 0.0
    if len(f1_values) > 1:
        margin = max(margin, float(np.max(np.diff(np.sort(f1_values)))))
    if len(g1_values) > 1:
        margin = max(margin, float(np.max(np.diff(np.sort(g1_values)))))
    summary = {"bounded": {"total": 0, "GlobalBounded": 0},
               "unbounded": {"total": 0, "CurvatureUnbounded": 0},
               "abelian": {"total": 0, "Abelian": 0},
               "open": {"total": 0, "verdicts": {}},
               "boundary": {"total": 0}, "undetermined_reasons": {}}
    for cell in cells:
        region = bggg_region(cell["f1"], cell["g1"], margin)
        cell["region"] = region
        if region == "bounded":
            summary["bounded"]["total"] += 1
            summary["bounded"]["GlobalBounded"] += cell["verdict"] == "GlobalBounded"
        elif region == "unbounded":
            summary["unbounded"]["total"] += 1
            summary["unbounded"]["CurvatureUnbounded"] += cell["verdict"] == "CurvatureUnbounded"
        elif region == "abelian":
            summary["abelian"]["total"] += 1
            summary["abelian"]["Abelian"] += cell["verdict"] in ("Abelian", "GlobalBounded")
        elif region == "open":
            summary["open"]["total"] += 1
            summary["open"]["verdicts"][cell["verdict"]] = \
                summary["open"]["verdicts"].get(cell["verdict"], 0) + 1
        else:
            summary["boundary"]["total"] += 1
        if cell["verdict"] == "Undetermined":
            summary["undetermined_reasons"][cell["reason"]] = \
                summary["undetermined_reasons"].get(cell["reason"], 0) + 1
    return ScanReport("bggg", f1_values, g1_values, cells, summary)


def scan_bs_x1(x1_values, t_max: float | None = None, tol: float = 1e-9) -> list:
    """1-d scan of Clarke boundary data x_1 on the spinor-bundle metric."""
    out = []
    for x1 in np.asarray(x1_values, dtype=float):
        data = BoundaryData("bs", "p1", (float(x1),))
        traj, cls = shoot(data, t_max=t_max, tol=tol)
        out.append({"x1": float(x1), "verdict": cls.verdict,
                    "curvature_sup": cls.curvature_sup,
                    "c_inf": cls.asymptote[0] if cls.asymptote else None})
    return out


# ---------------------------------------------------------------------------
# decay-rate fits and holonomy
# ---------------------------------------------------------------------------

def _connection_deviation_norm(traj: InstantonTrajectory, i: int) -> float:
    """|A - a_infty| at sample i (geometric norm, su2 inner product)."""
    st = traj.state(i)
    v = traj.values[i]
    if traj.system == "su2cubed":
        dplus = st.A[0] * v[0] - A_INFTY_COEFF
        dminus = st.B[0] * v[1]
        return math.sqrt(6.0 * (dplus / (2.0 * st.A[0])) ** 2
                         + 6.0 * (dminus / (2.0 * st.B[0])) ** 2)
    d = [st.A[0] * v[0] - A_INFTY_COEFF, st.A[1] * v[1] - A_INFTY_COEFF,
         st.B[0] * v[2], st.B[1] * v[3]]
    sc = [2.0 * st.A[0], 2.0 * st.A[1], 2.0 * st.B[0], 2.0 * st.B[1]]
    mult = [1, 2, 1, 2]
    return math.sqrt(sum(2.0 * m * (x / s) ** 2 for x, s, m in zip(d, sc, mult)))


def decay_fit(traj: InstantonTrajectory, quantity: str = "connection",
              window: float = 10.0) -> float:
    """Log-log slope of a decaying quantity over the last decade of samples.

    quantity "connection": |A - a_infty| (the AC limit on the spinor bundle);
    quantity "curvature": the pointwise |F_A|.
    """
    t_end = traj.t[-1]
    sel = [i for i, t in enumerate(traj.t) if t >= t_end / window]
    if len(sel) < 8:
        raise ValueError("trajectory tail too short for a decay fit")
    ts = traj.t[sel]
    if quantity == "connection":
        ys = np.array([_connection_deviation_norm(traj, i) for i in sel])
    elif quantity == "curvature":
        ys = curvature_norms(traj, sel)
    else:
        raise ValueError(f"unknown decay quantity {quantity!r}")
    if np.any(ys <= 0.0):
        raise ValueError("quantity vanished on the tail; nothing to fit")
    slope, _ = np.polyfit(np.log(ts), np.log(ys), 1)
    return float(slope)


def holonomy_angle_from_coefficient(c_inf: float) -> float:
    """Angle in [0, 2 pi) of Hol = exp(2 pi c_inf T_1) around the circle at oo."""
    return float((2.0 * math.pi * c_inf) % (2.0 * math.pi))


def holonomy_at_infinity(traj: InstantonTrajectory, rtol: float = 1e-5) -> float:
    """Holonomy angle of a bounded ALC trajectory.

    c_inf = lim A_1 f^+ is Richardson-extrapolated in 1/t^2; the two available
    extrapolants must agree to relative tolerance ``rtol``.
    """
    if traj.system != "u1red":
        raise ValueError("holonomy at infinity is an ALC (u1red) quantity")
    extr1, extr2 = limit_coefficients(traj)
    if abs(extr1[0] - extr2[0]) > rtol * (1.0 + abs(extr1[0])):
        raise ValueError(f"holonomy limit not converged: {extr2[0]} vs {extr1[0]}")
    return holonomy_angle_from_coefficient(float(extr1[0]))
