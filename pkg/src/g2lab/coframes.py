"""Shipped coframe algebras and their distinguished invariant forms.

Three homogeneous coframes cover every geometry in the package:

* ``s3xs3``: eta_1^+, .., eta_3^+, eta_1^-, .., eta_3^- on S^3 x S^3, built
  from the diagonal/anti-diagonal split of su(2) (+) su(2) with
  [T_i, T_j] = 2 eps_{ijk} T_k.  Carries the R^4 x S^3 metrics (Bryant-Salamon
  spinor bundle and BGGG) and the Sasaki-Einstein S^2 x S^3 forms.

* ``sp2``: e^1..e^4, eta^1..eta^3, om^1..om^3 on Sp(2), built from quaternionic
  2 x 2 matrices.  The e's span the S^4 horizontal space (rescaled so that
  d om^i = -2 om^{jk} + Omega_i / 2 and d eta^i = -2 eta^{jk} - Omegabar_i / 2
  hold on the nose), eta's the spin-connection block, om^1 the twistor U(1),
  om^2, om^3 the twistor fibre of CP^3 -> S^4.

* ``su3_flag``: nu_1, nu_2, e^1..e^4, s3, s8 on SU(3), built from Gell-Mann
  matrices.  nu's span the twistor fibre of the flag manifold over CP^2
  (the root space that supports the SO(3) bundle which extends over the zero
  section), e's the CP^2 horizontal space, s3/s8 the maximal torus.

All structure constants are produced by explicit matrix commutators, so d^2=0
holds to machine precision by construction; the displayed Maurer-Cartan
relations are asserted as tests rather than transcribed by hand.
"""

from __future__ import annotations

import functools

import numpy as np

from .liealg import CoframeAlgebra, LieValuedForm, form_from_components

__all__ = [
    "s3xs3",
    "sp2",
    "su3_flag",
    "S3XS3_LABELS",
    "SP2_LABELS",
    "SU3_LABELS",
    "sp2_asd_forms",
    "sp2_sd_forms",
    "su3_asd_forms",
    "sasaki_einstein_forms",
]

S3XS3_LABELS = ("ep1", "ep2", "ep3", "em1", "em2", "em3")
SP2_LABELS = ("e1", "e2", "e3", "e4", "eta1", "eta2", "eta3", "om1", "om2", "om3")
SU3_LABELS = ("nu1", "nu2", "e1", "e2", "e3", "e4", "s3", "s8")


def _snap(x: float) -> float:
    """Snap to the nearest multiple of 1/2 or sqrt(3)/2 (the only values
    occurring in these algebras), removing least-squares noise."""
    for unit in (0.5, np.sqrt(3.0) / 2.0):
        cand = round(x / unit) * unit
        if abs(x - cand) < 1e-9:
            return cand
    return x


def _structure_from_brackets(basis, bracket, expand) -> np.ndarray:
    """c[k][i][j] = e^k([X_i, X_j]) for the dual coframe of ``basis``."""
    n = len(basis)
    c = np.zeros((n, n, n))
    for i in range(n):
        for j in range(i + 1, n):
            coeffs = expand(bracket(basis[i], basis[j]))
            for k in range(n):
                v = _snap(float(coeffs[k]))
                c[k, i, j] = v
                c[k, j, i] = -v
    return c


# -- S^3 x S^3 ----------------------------------------------------------------

@functools.cache
def s3xs3() -> CoframeAlgebra:
    """Coframe of su(2)^+ (+) su(2)^-: T_i^+ = (T_i, T_i), T_i^- = (T_i, -T_i)."""
    def pauli_su2(i):
        # T_i = -i sigma_i, satisfying [T_i, T_j] = 2 eps_{ijk} T_k
        s = [np.array([[0, 1], [1, 0]], dtype=complex),
             np.array([[0, -1j], [1j, 0]], dtype=complex),
             np.array([[1, 0], [0, -1]], dtype=complex)]
        return -1j * s[i]

    basis = []
    for i in range(3):
        basis.append((pauli_su2(i), pauli_su2(i)))        # T_i^+
    for i in range(3):
        basis.append((pauli_su2(i), -pauli_su2(i)))       # T_i^-

    def bracket(x, y):
        return (x[0] @ y[0] - y[0] @ x[0], x[1] @ y[1] - y[1] @ x[1])

    def expand(z):
        # <T_i, T_j> = 2 delta_ij per factor under tr(a b^H)/... use flattening.
        mat = np.stack([np.concatenate([b[0].ravel(), b[1].ravel()]) for b in basis]).T
        vec = np.concatenate([z[0].ravel(), z[1].ravel()])
        coeffs, *_ = np.linalg.lstsq(mat, vec, rcond=None)
        coeffs = np.real_if_close(coeffs, tol=1e4)
        return np.real(coeffs)

    c = _structure_from_brackets(basis, bracket, expand)
    c[np.abs(c) < 1e-12] = 0.0
    return CoframeAlgebra(S3XS3_LABELS, c)


# -- Sp(2) --------------------------------------------------------------------

def _qmul(a, b):
    """Quaternion product on (w, x, y, z) arrays."""
    w1, x1, y1, z1 = a
    w2, x2, y2, z2 = b
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def _qconj(a):
    return np.array([a[0], -a[1], -a[2], -a[3]])


def _qmat_mul(A, B):
    """Product of 2x2 quaternionic matrices stored as A[r][c] = quaternion."""
    out = [[None, None], [None, None]]
    for r in range(2):
        for c in range(2):
            out[r][c] = _qmul(A[r][0], B[0][c]) + _qmul(A[r][1], B[1][c])
    return out


def _qmat_sub(A, B):
    return [[A[r][c] - B[r][c] for c in range(2)] for r in range(2)]


@functools.cache
def sp2() -> CoframeAlgebra:
    """Coframe of sp(2) adapted to the twistor fibration CP^3 -> S^4.

    Basis: m_1 spanned by off-diagonal Q(q)/2 for q in (1, i, j, k) (the /2
    rescales the horizontal coframe so the S^4 curvature forms appear with the
    factor 1/2), sp_1(1) the upper block (spin connection, eta's), sp_2(1) the
    lower block (om's).
    """
    zero = np.zeros(4)
    units = [np.array([1.0, 0, 0, 0]), np.array([0, 1.0, 0, 0]),
             np.array([0, 0, 1.0, 0]), np.array([0, 0, 0, 1.0])]

    def Q(q):       # off-diagonal [[0, q], [-conj(q), 0]]
        return [[zero, q], [-_qconj(q), zero]]

    def E(i):       # upper block Im-quaternion
        return [[units[i], zero], [zero, zero]]

    def F(i):       # lower block Im-quaternion
        return [[zero, zero], [zero, units[i]]]

    basis = [Q(units[a] / 2.0) for a in range(4)]
    basis += [E(i) for i in (1, 2, 3)]
    basis += [F(i) for i in (1, 2, 3)]

    def bracket(A, B):
        return _qmat_sub(_qmat_mul(A, B), _qmat_mul(B, A))

    def flatten(M):
        return np.concatenate([M[r][c] for r in range(2) for c in range(2)])

    mat = np.stack([flatten(b) for b in basis]).T

    def expand(z):
        coeffs, *_ = np.linalg.lstsq(mat, flatten(z), rcond=None)
        return coeffs

    c = _structure_from_brackets(basis, bracket, expand)
    c[np.abs(c) < 1e-12] = 0.0
    return CoframeAlgebra(SP2_LABELS, c)


def sp2_asd_forms(coframe: CoframeAlgebra) -> list:
    """Omega_1, Omega_2, Omega_3 = e^12 - e^34, e^13 - e^42, e^14 - e^23."""
    return [
        form_from_components(coframe, 2, {("e1", "e2"): 1.0, ("e3", "e4"): -1.0}),
        form_from_components(coframe, 2, {("e1", "e3"): 1.0, ("e4", "e2"): -1.0}),
        form_from_components(coframe, 2, {("e1", "e4"): 1.0, ("e2", "e3"): -1.0}),
    ]


def sp2_sd_forms(coframe: CoframeAlgebra) -> list:
    """Omegabar_1, Omegabar_2, Omegabar_3 = e^12 + e^34, e^13 + e^42, e^14 + e^23."""
    return [
        form_from_components(coframe, 2, {("e1", "e2"): 1.0, ("e3", "e4"): 1.0}),
        form_from_components(coframe, 2, {("e1", "e3"): 1.0, ("e4", "e2"): 1.0}),
        form_from_components(coframe, 2, {("e1", "e4"): 1.0, ("e2", "e3"): 1.0}),
    ]


# -- SU(3) --------------------------------------------------------------------

_GELL_MANN = [
    np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex),
    np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]], dtype=complex),
    np.array([[1, 0, 0], [0, -1, 0], [0, 0, 0]], dtype=complex),
    np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]], dtype=complex),
    np.array([[0, 0, -1j], [0, 0, 0], [1j, 0, 0]], dtype=complex),
    np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex),
    np.array([[0, 0, 0], [0, 0, -1j], [0, 1j, 0]], dtype=complex),
    np.array([[1, 0, 0], [0, 1, 0], [0, 0, -2]], dtype=complex) / np.sqrt(3.0),
]


@functools.cache
def su3_flag() -> CoframeAlgebra:
    """Coframe of su(3) adapted to the twistor fibration F_2 -> CP^2.

    Basis order (nu1, nu2, e1..e4, s3, s8) = K_1, K_2, K_4, K_5, K_6, K_7,
    K_3, K_8 with K_a = -(i/2) lambda_a.  The (K_1, K_2) root space is the
    fibre of the flag over CP^2 with the (1,2)-block isotropy U(2); the SO(3)
    bundle that extends over the zero section of the anti-self-dual 2-form
    bundle is the one whose weight is this fibre root.
    """
    K = [-0.5j * lam for lam in _GELL_MANN]
    basis = [K[0], K[1], K[3], K[4], K[5], K[6], K[2], K[7]]

    mat = np.stack([b.ravel() for b in basis]).T

    def bracket(x, y):
        return x @ y - y @ x

    def expand(z):
        coeffs, *_ = np.linalg.lstsq(mat, z.ravel(), rcond=None)
        coeffs = np.real_if_close(coeffs, tol=1e4)
        return np.real(coeffs)

    c = _structure_from_brackets(basis, bracket, expand)
    c[np.abs(c) < 1e-12] = 0.0
    return CoframeAlgebra(SU3_LABELS, c)


def su3_asd_forms(coframe: CoframeAlgebra) -> list:
    """The anti-self-dual triple on the CP^2 horizontal space.

    Normalised and labelled so that the Maurer-Cartan relations take the shape
    d nu_1 = s3 ^ nu_2 - W Omega_3, d nu_2 = -s3 ^ nu_1 - W Omega_2,
    d s3 = -nu_12 - W Omega_1 with a single constant W = 1/2, mirroring the
    Sp(2) conventions.
    """
    return [
        form_from_components(coframe, 2, {("e1", "e2"): 1.0, ("e3", "e4"): -1.0}),
        form_from_components(coframe, 2, {("e1", "e3"): 1.0, ("e2", "e4"): 1.0}),
        form_from_components(coframe, 2, {("e1", "e4"): 1.0, ("e2", "e3"): -1.0}),
    ]


# -- Sasaki-Einstein S^2 x S^3 ------------------------------------------------

def sasaki_einstein_forms(coframe: CoframeAlgebra) -> dict:
    """The homogeneous Sasaki-Einstein SU(2)-structure on S^2 x S^3.

    Returns alpha, omega_1, omega_2, omega_3, eta_infty as basic forms for the
    diagonal U(1) inside S^3 x S^3.  They satisfy d alpha = -2 omega_1,
    d omega_2 = 3 alpha ^ omega_3, d omega_3 = -3 alpha ^ omega_2, and
    d eta_infty ^ omega_i = 0.
    """
    q = 4.0 / 3.0
    alpha = form_from_components(coframe, 1, {("em1",): -q})
    # omega_1 carries the opposite sign to eta_2^+ ^ eta_3^- + eta_2^- ^ eta_3^+
    # so that d alpha = -2 omega_1 holds with alpha = -(4/3) eta_1^-.
    omega1 = form_from_components(coframe, 2, {("ep2", "em3"): -q, ("em2", "ep3"): -q})
    omega2 = form_from_components(coframe, 2, {("ep2", "ep3"): q, ("em2", "em3"): -q})
    omega3 = form_from_components(coframe, 2, {("ep2", "em2"): q, ("ep3", "em3"): q})
    eta_inf = form_from_components(coframe, 1, {("ep1",): 2.0})
    return {"alpha": alpha, "omega1": omega1, "omega2": omega2,
            "omega3": omega3, "eta_infty": eta_inf}
