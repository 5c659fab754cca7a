"""Invariant exterior calculus over a homogeneous coframe.

Everything in this package is expressed in a fixed left-invariant coframe
(e^1, ..., e^n) on a homogeneous space, whose exterior derivatives are given
by structure constants,

    d e^k = - sum_{i<j} c[k][i][j] e^i ^ e^j,          c[k][i][j] = -c[k][j][i].

Cohomogeneity-one objects live on the dt-extended coframe (dt, e^1, ..., e^n);
coefficients then depend on t and carry their own t-derivatives, so that

    d(dt ^ alpha + beta) = dt ^ (dt_beta - d_M alpha) + d_M beta,

with d_M the purely spatial derivative above.  Forms may take values in a
small Lie algebra: a standard su(2)-type basis T_1, T_2, T_3 with
[T_i, T_j] = 2 eps_{ijk} T_k and inner product <T_i, T_j> = 2 delta_ij (the
normalisation that makes the basic charge-1 ASD instanton on R^4 carry
Yang-Mills energy 8 pi^2), a u(1) line embedded as the T_1-axis with the same
inner product, or plain scalars.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CoframeAlgebra",
    "DiagonalMetric",
    "LieValuedForm",
    "ALGEBRA_DIMS",
    "wedge",
    "bracket_wedge",
    "inner_wedge",
    "d_invariant",
    "curvature",
    "hodge_star",
    "norm_sq",
    "zero_form",
    "one_form",
    "form_from_components",
]

# Lie algebra tags -> coefficient dimension.  "su2" covers every rank-3 case
# in this package (su(2) itself and the so(3) image used over CP^2): both use
# [T_i, T_j] = 2 eps_{ijk} T_k.  "u1" is the T_1-axis inside su2, kept
# 1-dimensional so abelian connections stay cheap.
ALGEBRA_DIMS = {"scalar": 1, "u1": 1, "su2": 3}

# <T_i, T_j> = 2 delta_ij on su2; the u1 line inherits the same weight so that
# embedding an abelian connection into su2 does not change any norm.
_ALGEBRA_IP_WEIGHT = {"scalar": 1.0, "u1": 2.0, "su2": 2.0}

_EPS = [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
        (1, 0, 2, -1.0), (2, 1, 0, -1.0), (0, 2, 1, -1.0)]


def _su2_bracket(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """[u, v] for coefficient vectors in the basis with [T_i,T_j]=2eps T_k."""
    return 2.0 * np.cross(u, v)


@dataclass(frozen=True)
class CoframeAlgebra:
    """Structure constants of an invariant coframe.

    ``structure[k][i][j]`` holds c[k][i][j] in the convention
    d e^k = - sum_{i<j} c[k][i][j] e^i ^ e^j.  When ``has_dt`` is true the
    label at index 0 is the coordinate differential dt: it has no structure
    constants and is instead handled by the time-derivative part of d.
    """

    labels: tuple
    structure: np.ndarray  # shape (n, n, n), antisymmetric in last two slots
    has_dt: bool = False

    def __post_init__(self):
        n = len(self.labels)
        if self.structure.shape != (n, n, n):
            raise ValueError("structure constants must have shape (n, n, n)")
        if not np.allclose(self.structure, -np.swapaxes(self.structure, 1, 2)):
            raise ValueError("structure constants must satisfy c[k][i][j] = -c[k][j][i]")

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def spatial_indices(self) -> range:
        return range(1, self.dim) if self.has_dt else range(self.dim)

    def with_dt(self) -> "CoframeAlgebra":
        """Return the dt-extended coframe (dt, e^1, ..., e^n)."""
        if self.has_dt:
            return self
        n = self.dim + 1
        c = np.zeros((n, n, n))
        c[1:, 1:, 1:] = self.structure
        return CoframeAlgebra(("dt",) + tuple(self.labels), c, has_dt=True)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def d_basis_one_form(self, k: int) -> dict:
        """d e^k as a map {(i, j): coefficient} with i < j."""
        out = {}
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                ckij = self.structure[k, i, j]
                if ckij != 0.0:
                    out[(i, j)] = -ckij
        return out


@dataclass(frozen=True)
class DiagonalMetric:
    """Diagonal metric g = sum_i scales[i]^2 e^i (x) e^i on a coframe.

    ``scales`` must be positive; a dt direction always has scale 1.
    """

    scales: np.ndarray

    def __post_init__(self):
        if np.any(np.asarray(self.scales) <= 0.0):
            raise ValueError("metric scales must be strictly positive")

    @property
    def dim(self) -> int:
        return len(self.scales)

    def covector_norm_factor(self, idx: tuple) -> float:
        """|e^{i_1...i_p}|^2 = prod 1/scales^2 over the index tuple."""
        out = 1.0
        for i in idx:
            out /= self.scales[i] ** 2
        return out

    def volume_coefficient(self) -> float:
        return float(np.prod(self.scales))


def _sorted_sign(idx: tuple):
    """Sort an index tuple, returning (sorted tuple, permutation sign).

    Returns sign 0 for repeated indices.
    """
    idx = list(idx)
    sign = 1
    for i in range(1, len(idx)):
        j = i
        while j > 0 and idx[j - 1] > idx[j]:
            idx[j - 1], idx[j] = idx[j], idx[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(idx, idx[1:]):
        if a == b:
            return tuple(idx), 0
    return tuple(idx), sign


@dataclass
class LieValuedForm:
    """A Lie-algebra-valued invariant form on a coframe.

    ``components`` maps strictly increasing index tuples (over all coframe
    labels, dt included when present) to coefficient vectors of length
    ALGEBRA_DIMS[algebra].  ``t_deriv`` optionally maps the same keys to the
    t-derivatives of the coefficients; it is required by d_invariant whenever
    the coefficients are time dependent (a missing map means "constant in t").
    """

    degree: int
    algebra: str
    coframe: CoframeAlgebra
    components: dict = field(default_factory=dict)
    t_deriv: dict | None = None

    def __post_init__(self):
        if self.algebra not in ALGEBRA_DIMS:
            raise ValueError(f"unknown algebra tag {self.algebra!r}")
        adim = ALGEBRA_DIMS[self.algebra]
        clean = {}
        for idx, vec in self.components.items():
            vec = np.atleast_1d(np.asarray(vec, dtype=float))
            if len(idx) != self.degree:
                raise ValueError(f"index tuple {idx} has wrong length for degree {self.degree}")
            if vec.shape != (adim,):
                raise ValueError(f"coefficient for {idx} has wrong algebra dimension")
            key, sign = _sorted_sign(tuple(idx))
            if sign == 0:
                continue
            if np.any(vec != 0.0):
                clean[key] = clean.get(key, np.zeros(adim)) + sign * vec
        self.components = {k: v for k, v in clean.items() if np.any(v != 0.0)}
        if self.t_deriv is not None:
            td = {}
            for idx, vec in self.t_deriv.items():
                vec = np.atleast_1d(np.asarray(vec, dtype=float))
                key, sign = _sorted_sign(tuple(idx))
                if sign == 0:
                    continue
                td[key] = td.get(key, np.zeros(adim)) + sign * vec
            self.t_deriv = td

    # -- basic queries ---------------------------------------------------

    @property
    def algebra_dim(self) -> int:
        return ALGEBRA_DIMS[self.algebra]

    def coefficient(self, idx: tuple) -> np.ndarray:
        key, sign = _sorted_sign(tuple(idx))
        if sign == 0 or key not in self.components:
            return np.zeros(self.algebra_dim)
        return sign * self.components[key]

    def dt_part(self) -> "LieValuedForm":
        """The alpha of omega = dt ^ alpha + beta (a (degree-1)-form)."""
        if not self.coframe.has_dt:
            raise ValueError("coframe has no dt direction")
        comps = {idx[1:]: vec for idx, vec in self.components.items() if idx and idx[0] == 0}
        return LieValuedForm(self.degree - 1, self.algebra, self.coframe, comps)

    def spatial_part(self) -> "LieValuedForm":
        """The beta of omega = dt ^ alpha + beta."""
        if not self.coframe.has_dt:
            return self
        comps = {idx: vec for idx, vec in self.components.items() if not (idx and idx[0] == 0)}
        return LieValuedForm(self.degree, self.algebra, self.coframe, comps)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(np.all(np.abs(v) <= tol) for v in self.components.values())

    def max_abs(self) -> float:
        if not self.components:
            return 0.0
        return max(np.max(np.abs(v)) for v in self.components.values())

    # -- linear structure --------------------------------------------------

    def __add__(self, other: "LieValuedForm") -> "LieValuedForm":
        self._check_compatible(other)
        comps = {k: v.copy() for k, v in self.components.items()}
        for k, v in other.components.items():
            comps[k] = comps.get(k, np.zeros(self.algebra_dim)) + v
        td = None
        if self.t_deriv is not None or other.t_deriv is not None:
            td = {k: v.copy() for k, v in (self.t_deriv or {}).items()}
            for k, v in (other.t_deriv or {}).items():
                td[k] = td.get(k, np.zeros(self.algebra_dim)) + v
        return LieValuedForm(self.degree, self.algebra, self.coframe, comps, td)

    def __sub__(self, other: "LieValuedForm") -> "LieValuedForm":
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> "LieValuedForm":
        comps = {k: scalar * v for k, v in self.components.items()}
        td = None if self.t_deriv is None else {k: scalar * v for k, v in self.t_deriv.items()}
        return LieValuedForm(self.degree, self.algebra, self.coframe, comps, td)

    def _check_compatible(self, other: "LieValuedForm"):
        if self.coframe is not other.coframe and self.coframe.labels != other.coframe.labels:
            raise ValueError("forms live on different coframes")
        if self.degree != other.degree or self.algebra != other.algebra:
            raise ValueError("forms have mismatched degree or algebra")

    def restrict_indices(self, keep, tol: float = 0.0) -> "LieValuedForm":
        """Project onto components supported on ``keep``; error if the rest exceeds tol.

        Used to check that curvature-type forms are basic (no legs along
        isotropy directions) before taking norms on the physical coframe.
        """
        keep = set(keep)
        comps, bad = {}, 0.0
        for idx, vec in self.components.items():
            if set(idx) <= keep:
                comps[idx] = vec
            else:
                bad = max(bad, float(np.max(np.abs(vec))))
        if bad > tol:
            raise ValueError(f"form has non-basic components of size {bad:.3e}")
        return LieValuedForm(self.degree, self.algebra, self.coframe, comps)


def zero_form(coframe: CoframeAlgebra, degree: int = 0, algebra: str = "scalar") -> LieValuedForm:
    return LieValuedForm(degree, algebra, coframe, {})


def one_form(coframe: CoframeAlgebra, label: str, vec, algebra: str = "scalar") -> LieValuedForm:
    return LieValuedForm(1, algebra, coframe, {(coframe.index(label),): np.atleast_1d(vec)})


def form_from_components(coframe: CoframeAlgebra, degree: int, comps: dict,
                         algebra: str = "scalar", t_deriv: dict | None = None) -> LieValuedForm:
    """Build a form from {label tuple or index tuple: coefficient}."""
    def to_idx(key):
        return tuple(coframe.index(k) if isinstance(k, str) else k for k in key)

    comps = {to_idx(k): np.atleast_1d(v) for k, v in comps.items()}
    td = None if t_deriv is None else {to_idx(k): np.atleast_1d(v) for k, v in t_deriv.items()}
    return LieValuedForm(degree, algebra, coframe, comps, td)


# -- wedge products ---------------------------------------------------------

def _wedge_generic(a: LieValuedForm, b: LieValuedForm, combine, out_algebra: str,
                   with_deriv: bool = False) -> LieValuedForm:
    degree = a.degree + b.degree
    n = a.coframe.dim
    if degree > n:
        return zero_form(a.coframe, min(degree, n), out_algebra)
    comps: dict = {}
    td: dict = {} if with_deriv else None

    def accumulate(target, idx_a, idx_b, vec):
        key, sign = _sorted_sign(idx_a + idx_b)
        if sign == 0 or vec is None:
            return
        target[key] = target.get(key, np.zeros(ALGEBRA_DIMS[out_algebra])) + sign * vec

    for ia, va in a.components.items():
        for ib, vb in b.components.items():
            accumulate(comps, ia, ib, combine(va, vb))
    if with_deriv:
        da = a.t_deriv or {}
        db = b.t_deriv or {}
        for ia, va in da.items():
            for ib, vb in b.components.items():
                accumulate(td, ia, ib, combine(va, vb))
        for ia, va in a.components.items():
            for ib, vb in db.items():
                accumulate(td, ia, ib, combine(va, vb))
    return LieValuedForm(degree, out_algebra, a.coframe, comps, td)


def wedge(a: LieValuedForm, b: LieValuedForm, track_deriv: bool = False) -> LieValuedForm:
    """Plain wedge product; at least one factor must be scalar/u1-as-coefficient.

    For two algebra-valued inputs use bracket_wedge or inner_wedge; wedging a
    scalar form with an algebra-valued one multiplies coefficients through.
    """
    if a.algebra == "scalar" or b.algebra == "scalar":
        out_alg = b.algebra if a.algebra == "scalar" else a.algebra
        combine = (lambda u, v: u[0] * v) if a.algebra == "scalar" else (lambda u, v: v[0] * u)
        return _wedge_generic(a, b, combine, out_alg, with_deriv=track_deriv)
    if a.algebra == b.algebra:
        raise ValueError("two algebra-valued forms: use bracket_wedge or inner_wedge")
    raise ValueError(f"cannot wedge algebras {a.algebra!r} and {b.algebra!r}")


def bracket_wedge(a: LieValuedForm, b: LieValuedForm) -> LieValuedForm:
    """[a ^ b]: wedge on form parts, Lie bracket on coefficients."""
    if a.algebra == "u1":
        a = embed_u1(a)
    if b.algebra == "u1":
        b = embed_u1(b)
    if a.algebra != "su2" or b.algebra != "su2":
        raise ValueError("bracket_wedge requires su2-valued forms")
    return _wedge_generic(a, b, _su2_bracket, "su2")


def inner_wedge(a: LieValuedForm, b: LieValuedForm) -> LieValuedForm:
    """<a ^ b>: wedge on form parts, <T_i,T_j> = 2 delta_ij on coefficients."""
    if a.algebra != b.algebra:
        raise ValueError("inner_wedge requires matching algebras")
    w = _ALGEBRA_IP_WEIGHT[a.algebra]
    return _wedge_generic(a, b, lambda u, v: np.array([w * float(u @ v)]), "scalar")


def embed_u1(a: LieValuedForm) -> LieValuedForm:
    """Embed a u1-valued form as the T_1-component of an su2-valued one."""
    comps = {k: np.array([v[0], 0.0, 0.0]) for k, v in a.components.items()}
    td = None if a.t_deriv is None else {k: np.array([v[0], 0.0, 0.0]) for k, v in a.t_deriv.items()}
    return LieValuedForm(a.degree, "su2", a.coframe, comps, td)


# -- exterior derivative and curvature --------------------------------------

def d_invariant(a: LieValuedForm, coframe: CoframeAlgebra | None = None) -> LieValuedForm:
    """Exterior derivative from structure constants plus dt ^ (time derivative).

    On a dt-extended coframe, spatial components must carry t_deriv data when
    time dependent; components that already contain dt contribute only their
    spatial derivative (their t-derivative would meet dt ^ dt = 0).
    """
    cf = coframe or a.coframe
    if cf.labels != a.coframe.labels:
        raise ValueError("form does not live on the supplied coframe")
    adim = a.algebra_dim
    comps: dict = {}

    def accumulate(idx, vec):
        key, sign = _sorted_sign(idx)
        if sign == 0:
            return
        comps[key] = comps.get(key, np.zeros(adim)) + sign * vec

    # structure-constant part: d(e^I v) = sum_q (-1)^(q) e^{i_1..} ^ d e^{i_q} ^ ...
    for idx, vec in a.components.items():
        for q, iq in enumerate(idx):
            sgn = (-1.0) ** q
            rest = idx[:q] + idx[q + 1:]
            for (i, j), c in cf.d_basis_one_form(iq).items():
                accumulate((i, j) + rest, sgn * c * vec)

    # time-derivative part dt ^ dt_beta
    if cf.has_dt:
        time_dependent = a.t_deriv is not None
        if not time_dependent:
            # A constant form is fine; but catch the common error of feeding a
            # time-dependent object without derivatives by requiring explicit
            # opt-in: constant forms should carry t_deriv = {} ... we accept
            # None as "constant" since that is the natural default.
            pass
        for idx, vec in (a.t_deriv or {}).items():
            if idx and idx[0] == 0:
                continue  # dt ^ dt = 0
            accumulate((0,) + idx, vec)

    return LieValuedForm(min(a.degree + 1, cf.dim), a.algebra, cf, comps)


def curvature(A: LieValuedForm) -> LieValuedForm:
    """F = dA + 1/2 [A ^ A] for an algebra-valued connection 1-form."""
    if A.degree != 1:
        raise ValueError("curvature expects a 1-form")
    dA = d_invariant(A)
    if A.algebra == "scalar":
        return dA
    Asu = embed_u1(A) if A.algebra == "u1" else A
    F = d_invariant(Asu) + 0.5 * bracket_wedge(Asu, Asu)
    return F


# -- Hodge star and norms ----------------------------------------------------

def hodge_star(a: LieValuedForm, metric: DiagonalMetric, orientation: float = 1.0) -> LieValuedForm:
    """Hodge star for the diagonal metric, orientation e^1 ^ ... ^ e^n.

    ``orientation`` = -1 flips the volume form sign (used by coframes whose
    declared label order is negatively oriented for the geometric conventions
    in play).  In Euclidean signature ** = (-1)^{p(n-p)} id.
    """
    n = a.coframe.dim
    if metric.dim != n:
        raise ValueError("metric dimension does not match coframe")
    full = tuple(range(n))
    comps: dict = {}
    for idx, vec in a.components.items():
        comp = tuple(i for i in full if i not in idx)
        # sign of the permutation (idx, comp) relative to (0..n-1)
        perm = idx + comp
        _, sign = _sorted_sign(perm)
        factor = sign * orientation * metric.volume_coefficient() * metric.covector_norm_factor(idx)
        key, s2 = _sorted_sign(comp)
        if s2 == 0:
            continue
        comps[key] = comps.get(key, np.zeros(a.algebra_dim)) + factor * s2 * vec
    return LieValuedForm(n - a.degree, a.algebra, a.coframe, comps)


def norm_sq(a: LieValuedForm, metric: DiagonalMetric) -> float:
    """|a|^2, diagonal metric on the coframe, <T_i,T_j> = 2 delta_ij on su2/u1."""
    w = _ALGEBRA_IP_WEIGHT[a.algebra]
    total = 0.0
    for idx, vec in a.components.items():
        total += w * float(vec @ vec) * metric.covector_norm_factor(idx)
    return total


def norm(a: LieValuedForm, metric: DiagonalMetric) -> float:
    return math.sqrt(max(norm_sq(a, metric), 0.0))


def spatial_d(a: LieValuedForm) -> LieValuedForm:
    """Structure-constant part of d only (time dependence ignored)."""
    return d_invariant(LieValuedForm(a.degree, a.algebra, a.coframe, a.components))


def bianchi_residual(A: LieValuedForm) -> float:
    """max |d F + [A ^ F]| for a connection in temporal gauge.

    With F = dt ^ adot + F_a the time derivative of the spatial curvature is
    dt_F_a = d_M adot + [adot ^ A], which is attached to F before applying d.
    """
    if A.degree != 1:
        raise ValueError("bianchi_residual expects a connection 1-form")
    Asu = embed_u1(A) if A.algebra == "u1" else A
    if any(idx and idx[0] == 0 for idx in Asu.components):
        raise ValueError("connection must be in temporal gauge (no dt leg)")
    F = curvature(Asu)
    adot = LieValuedForm(1, "su2", Asu.coframe, dict(Asu.t_deriv or {}))
    Fa = F.spatial_part()
    Fa_dot = spatial_d(adot) + bracket_wedge(adot, Asu)
    Fa.t_deriv = dict(Fa_dot.components)
    dt_al = {(0,) + idx: v for idx, v in (F.dt_part().components or {}).items()}
    Ffull = LieValuedForm(2, "su2", Asu.coframe,
                          {**Fa.components, **dt_al}, Fa.t_deriv)
    res = d_invariant(Ffull) + bracket_wedge(Asu, Ffull)
    return res.max_abs()


def subcoframe(parent: CoframeAlgebra, labels) -> CoframeAlgebra:
    """A coframe on a label subset, for Hodge star and norms only.

    Structure constants are zeroed: exterior derivatives must be taken on the
    parent (restriction does not commute with d on isotropy directions).
    """
    labels = tuple(labels)
    n = len(labels)
    return CoframeAlgebra(labels, np.zeros((n, n, n)), has_dt=parent.has_dt and labels[0] == "dt")


def restrict_form(a: LieValuedForm, sub: CoframeAlgebra, tol: float = 0.0) -> LieValuedForm:
    """Re-express a form on a subcoframe; components outside it must be <= tol."""
    lut = {}
    for i, lab in enumerate(a.coframe.labels):
        if lab in sub.labels:
            lut[i] = sub.index(lab)
    comps, bad = {}, 0.0
    for idx, vec in a.components.items():
        if all(i in lut for i in idx):
            comps[tuple(lut[i] for i in idx)] = vec
        else:
            bad = max(bad, float(np.max(np.abs(vec))))
    if bad > tol:
        raise ValueError(f"form has components of size {bad:.3e} outside the subcoframe")
    return LieValuedForm(a.degree, a.algebra, sub, comps)


# -- small helpers used by tests and shipped-constant verification ----------

def d_squared_max(coframe: CoframeAlgebra) -> float:
    """max over basis 1-forms of |d(d e^k)|, a Jacobi-identity residual."""
    worst = 0.0
    for k in coframe.spatial_indices:
        e_k = LieValuedForm(1, "scalar", coframe, {(k,): np.array([1.0])})
        dd = d_invariant(d_invariant(e_k))
        worst = max(worst, dd.max_abs())
    return worst


def random_form(coframe: CoframeAlgebra, degree: int, rng: np.random.Generator,
                algebra: str = "scalar") -> LieValuedForm:
    adim = ALGEBRA_DIMS[algebra]
    comps = {}
    for idx in itertools.combinations(range(coframe.dim), degree):
        comps[idx] = rng.standard_normal(adim)
    return LieValuedForm(degree, algebra, coframe, comps)
