"""Second-variation diagnostics: Fourier blocks of the Jacobi operator on
the constant-latitude maps, their kernel at the distinguished latitude, the
conformal-direction second variation, and a discretized index/nullity count
for the generic (1,1,0) maps.

For the constant-latitude map at (r+a)^2 + b^2 = p^2 the Jacobi operator has
constant coefficients in the orthonormal frame

    nu1 = (i e^{2 pi i p y / b}, 0),
    nu2 = (0, i e^{-2 pi i (b x - (r+a) y)/b}),
    nu3 = (-B e^{2 pi i p y / b}, A e^{-2 pi i (b x - (r+a) y)/b}),

A = cos phi0, B = sin phi0, and splits into 3x3 blocks over the Fourier
modes e^{2 pi i (l b x + (k - l a) y)/b}.  At phi0 = arccos(sqrt(4p^2-q^2)/(2b))
the blocks (+-q, 0) become singular; their kernel fields are Jacobi fields
that no harmonic deformation integrates (integrability would force both
q = 2p and q = 2|r+a|, impossible on the boundary).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import dblquad
from scipy.sparse import csc_matrix, lil_matrix
from scipy.sparse.linalg import eigsh

from eqtorus.maps import build_circle_map, build_profiles
from eqtorus.tau_solver import (
    CIRCLE_TOL,
    InfeasibleParametersError,
    ModuliPoint,
    classify_params,
    solve_tau,
)

__all__ = [
    "JacobiBlock",
    "jacobi_block",
    "jacobi_block_det_closed_form",
    "KernelPair",
    "special_phi0_kernel",
    "hersch_second_variation",
    "hersch_quadrature",
    "IndexNullity",
    "index_nullity_estimate",
]

_M1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])


def _check_boundary(point: ModuliPoint, p: int, r: int) -> float:
    gap = (r + point.a) ** 2 + point.b**2 - p * p
    if abs(gap) > CIRCLE_TOL:
        raise InfeasibleParametersError(
            f"(r+a)^2 + b^2 - p^2 = {gap}: Jacobi blocks are defined on the "
            "constant-latitude boundary only")
    return r + point.a


@dataclass(frozen=True)
class JacobiBlock:
    """One Fourier block of the Jacobi operator (frame nu1, nu2, nu3)."""

    k: int
    l: int
    matrix: np.ndarray
    det: complex
    det_closed_form: float


def jacobi_block_det_closed_form(point: ModuliPoint, p: int, r: int,
                                 phi0: float, k: int, l: int) -> float:
    a, b = point.a, point.b
    A, B = math.cos(phi0), math.sin(phi0)
    rpa = r + a
    mu = l * l * b * b + (k - l * a) ** 2
    return mu * (mu * mu
                 - 4.0 * A * A * (l * b * b - (k - l * a) * rpa) ** 2
                 - 4.0 * B * B * p * p * (k - l * a) ** 2)


def jacobi_block(point: ModuliPoint, p: int, r: int, phi0: float,
                 k: int, l: int) -> JacobiBlock:
    """Assemble the (k, l) block and cross-check its determinant.

    The block is Hermitian: a real multiple of the identity plus i times
    two real antisymmetric matrices.
    """
    rpa = _check_boundary(point, p, r)
    a, b = point.a, point.b
    A, B = math.cos(phi0), math.sin(phi0)
    m2 = np.array([[0.0, 0.0, B * p],
                   [0.0, 0.0, A * rpa],
                   [-B * p, -A * rpa, 0.0]])
    mu = l * l * b * b + (k - l * a) ** 2
    mat = (mu * np.eye(3, dtype=complex)
           + 2j * l * b * b * A * _M1
           + 2j * (k - l * a) * m2)
    det = complex(np.linalg.det(mat))
    return JacobiBlock(k=int(k), l=int(l), matrix=mat, det=det,
                       det_closed_form=jacobi_block_det_closed_form(
                           point, p, r, phi0, k, l))


@dataclass(frozen=True)
class KernelPair:
    """The two Jacobi fields spanned by the singular (+-q, 0) blocks.

    V1, V2 map y to real frame components (coefficients of nu1, nu2, nu3);
    residuals certify J V = 0 numerically.  The integrability obstruction:
    a harmonic deformation generating either field would need both
    q = 2p and q = 2|r+a|, which the boundary relation forbids.
    """

    phi0: float
    q: int
    V1: object
    V2: object
    residuals: tuple[float, float]
    needs_q_eq_2p: bool
    needs_q_eq_2rpa: bool
    integrability_possible: bool


def special_phi0_kernel(point: ModuliPoint, p: int, r: int, q: int) -> KernelPair:
    rpa = _check_boundary(point, p, r)
    if 4 * p * p < q * q:
        raise ValueError(f"4 p^2 = {4 * p * p} < q^2 = {q * q}: the "
                         "distinguished latitude does not exist")
    b = point.b
    arg = math.sqrt(4.0 * p * p - q * q) / (2.0 * b)
    if arg > 1.0:
        raise ValueError("latitude argument exceeds 1; q < 2|r+a| here")
    phi0 = math.acos(arg)
    A, B = math.cos(phi0), math.sin(phi0)
    kappa = 2.0 * math.pi * q / b

    def V1(y):
        y = np.asarray(y, dtype=float)
        return np.stack([2.0 * B * p * np.cos(kappa * y),
                         2.0 * A * rpa * np.cos(kappa * y),
                         -q * np.sin(kappa * y)])

    def V2(y):
        y = np.asarray(y, dtype=float)
        return np.stack([2.0 * B * p * np.sin(kappa * y),
                         2.0 * A * rpa * np.sin(kappa * y),
                         q * np.cos(kappa * y)])

    # Fourier content of V1, V2 sits in the (+-q, 0) modes; applying the
    # corresponding blocks to the coefficient vectors certifies J V = 0
    vec_plus = np.array([B * p, A * rpa, 0.5j * q])
    residuals = []
    for kk, vec in ((q, vec_plus), (-q, vec_plus.conjugate())):
        block = jacobi_block(point, p, r, phi0, kk, 0)
        residuals.append(float(np.linalg.norm(block.matrix @ vec)))
    return KernelPair(
        phi0=phi0, q=int(q), V1=V1, V2=V2,
        residuals=(residuals[0], residuals[1]),
        needs_q_eq_2p=(q == 2 * p),
        needs_q_eq_2rpa=(q == 2 * abs(rpa)),
        integrability_possible=(q == 2 * p and q == 2 * abs(rpa)),
    )


# --------------------------------------------------------------------------
# conformal-direction second variation on the rhombic boundary
# --------------------------------------------------------------------------


def hersch_closed_form(b0: float) -> float:
    return 4.0 * math.pi**2 / b0**3 * (9.0 / 8.0 - b0 * b0)


def hersch_quadrature(b0: float) -> float:
    """2D quadrature of int (3 <u, e1>^2 - 1) |du|^2 over the torus."""
    a0 = math.sqrt(max(1.0 - b0 * b0, 0.0))
    phi0 = math.acos(math.sqrt(3.0) / (2.0 * b0))
    cm = build_circle_map(ModuliPoint(a0, b0), 1, 0, phi0)
    dens = 2.0 * cm.energy_density  # |du|^2

    def integrand(y, x):
        z1, _ = cm.map_values(x, y)
        return (3.0 * float(z1.real) ** 2 - 1.0) * dens

    val, _ = dblquad(integrand, 0.0, 1.0, 0.0, b0, epsabs=1e-11, epsrel=1e-11)
    return val


def hersch_second_variation(b0: float) -> float:
    """Second variation of energy along the first conformal direction of S^3
    at the boundary map with latitude arccos(sqrt(3)/(2 b0)).

    Returns the closed form 4 pi^2 (9/8 - b0^2) / b0^3 after certifying it
    against the 2D quadrature to 1e-9; positive for b0^2 < 9/8, which is why
    the one-sided energy comparison fails for these maps.
    """
    if not 0.0 < b0 <= 1.0:
        raise ValueError(f"b0={b0!r} outside (0, 1]")
    if math.sqrt(3.0) / (2.0 * b0) > 1.0:
        raise ValueError(f"b0={b0!r} below sqrt(3)/2: latitude undefined")
    closed = hersch_closed_form(b0)
    quad_val = hersch_quadrature(b0)
    if abs(closed - quad_val) > 1e-9 * max(1.0, abs(closed)):
        raise RuntimeError(
            f"second-variation quadrature {quad_val!r} disagrees with the "
            f"closed form {closed!r}")
    return closed


# --------------------------------------------------------------------------
# discretized index/nullity of the generic (1,1,0) maps
# --------------------------------------------------------------------------


@dataclass
class IndexNullity:
    index: int
    nullity: int
    converged: bool
    per_mode: dict = field(default_factory=dict)
    zero_tol: float = 1e-5


def _frame_coefficients(profiles, y):
    """Pointwise data of the second-variation form in the adapted frame.

    Sections of the pullback tangent bundle are written in the frame
    (i u, e2, i e2) with e2 = (-sin phi e^{i theta}, cos phi e^{i psi});
    the flat derivative of V = sum f_a E_a splits into frame-component
    derivatives plus rotation (Omega) and normal-leak (sigma) parts, and

        Q(V) = int |D_x f|^2 + |sigma_x . f|^2 + |D_y f|^2 + |sigma_y . f|^2
               - 2 rho |f|^2.
    """
    c2 = profiles.cos2_phi(y)
    s2 = 1.0 - c2
    sc = np.sqrt(c2 * s2)
    dphi = profiles.dphi(y)
    dth = profiles.dtheta(y)
    dal = profiles.dalpha(y)
    g = (dal - dth) * sc
    hcoef = dth * s2 + dal * c2
    cd = profiles.tau.c + profiles.tau.d
    n = y.size
    omega_x = np.zeros((n, 3, 3))
    omega_x[:, 0, 1] = 2.0 * math.pi * sc
    omega_x[:, 1, 0] = -2.0 * math.pi * sc
    omega_x[:, 1, 2] = -2.0 * math.pi * c2
    omega_x[:, 2, 1] = 2.0 * math.pi * c2
    sigma_x = np.zeros((n, 3))
    sigma_x[:, 0] = -2.0 * math.pi * s2
    sigma_x[:, 2] = -2.0 * math.pi * sc
    omega_y = np.zeros((n, 3, 3))
    omega_y[:, 0, 1] = g
    omega_y[:, 1, 0] = -g
    omega_y[:, 0, 2] = -dphi
    omega_y[:, 2, 0] = dphi
    omega_y[:, 1, 2] = -hcoef
    omega_y[:, 2, 1] = hcoef
    sigma_y = np.zeros((n, 3))
    sigma_y[:, 0] = -cd
    sigma_y[:, 1] = -dphi
    sigma_y[:, 2] = -g
    rho = profiles.rho(y)
    return omega_x, sigma_x, omega_y, sigma_y, rho


def _mode_matrix(profiles, l: int, n: int) -> csc_matrix:
    """Sparse Hermitian form of the mode-l second variation, mass = identity.

    Staggered first differences with midpoint frame rotation keep the
    derivative part a Gram matrix (no checkerboard null modes); pointwise
    terms sit on the nodes.  The Floquet wrap carries e^{-2 pi i l a}.
    """
    point = profiles.point
    b = point.b
    h = b / n
    y_nodes = np.arange(n) * h
    y_mid = y_nodes + 0.5 * h
    omega_x, sigma_x, _, sigma_y_node, rho = _frame_coefficients(profiles, y_nodes)
    omega_y_mid = _frame_coefficients(profiles, y_mid)[2]
    mu = np.exp(-2j * math.pi * l * point.a)

    B = lil_matrix((3 * n, 3 * n), dtype=complex)
    inv_h = 1.0 / h
    for j in range(n):
        jn = (j + 1) % n
        wrap = mu if jn == 0 else 1.0
        left = -inv_h * np.eye(3) + 0.5 * omega_y_mid[j]
        right = (inv_h * np.eye(3) + 0.5 * omega_y_mid[j]) * wrap
        B[3 * j:3 * j + 3, 3 * j:3 * j + 3] = left
        B[3 * j:3 * j + 3, 3 * jn:3 * jn + 3] += right
    B = B.tocsc()
    K = (B.getH() @ B).tolil()

    two_pi_l = 2.0 * math.pi * l
    for j in range(n):
        dx = two_pi_l * 1j * np.eye(3) + omega_x[j]
        P = dx.conjugate().T @ dx
        P = P + np.outer(sigma_x[j], sigma_x[j])
        P = P + np.outer(sigma_y_node[j], sigma_y_node[j])
        P = P - 2.0 * rho[j] * np.eye(3)
        K[3 * j:3 * j + 3, 3 * j:3 * j + 3] += P
    return K.tocsc()


def _mode_spectrum(profiles, l: int, n: int, k_eigs: int, span: float):
    """Eigenvalues of the mode-l form nearest zero, certified to cover
    [-span, span]; k_eigs grows until the coverage holds."""
    K = _mode_matrix(profiles, l, n)
    dim = K.shape[0]
    k = min(k_eigs, dim - 2)
    while True:
        try:
            vals = eigsh(K, k=k, sigma=0.0, which="LM",
                         return_eigenvectors=False)
        except RuntimeError:  # an exactly singular shift; nudge it
            vals = eigsh(K, k=k, sigma=1e-7, which="LM",
                         return_eigenvectors=False)
        vals = np.sort(vals.real)
        if vals.size >= dim - 2 or np.max(np.abs(vals)) > span:
            return vals
        k = min(2 * k, dim - 2)


def index_nullity_estimate(point: ModuliPoint,
                           resolutions: tuple[int, int] = (512, 1024),
                           zero_tol: float = 1e-5,
                           l_cap: int = 6) -> IndexNullity:
    """Energy index and nullity of the (1,1,0) map by Fourier-mode counting.

    Each x-Fourier mode gives a one-dimensional quadratic form in the frame
    components, discretized at the two resolutions; eigenvalues near zero are
    Richardson-extrapolated across the pair before classification, and the
    eigen-counts (not values) decide convergence.  Modes l >= 1 count twice
    (real and imaginary parts).  The mode loop stops once a mode is strictly
    positive, which the l^2 growth of the x-term makes monotone.
    """
    params = classify_params(point, 1, 1, 0)
    tau = solve_tau(point, params)
    profiles = build_profiles(tau, params, point)
    span = 4.0 * math.pi**2 * (tau.tau2 + tau.tau3 - tau.tau1) + 10.0

    index = 0
    nullity = 0
    converged = True
    per_mode = {}
    n_lo, n_hi = resolutions
    for l in range(l_cap + 1):
        lo = _mode_spectrum(profiles, l, n_lo, 40, span)
        hi = _mode_spectrum(profiles, l, n_hi, 40, span)
        window = 0.5 * span
        lo_w = lo[np.abs(lo) < window]
        hi_w = hi[np.abs(hi) < window]
        if lo_w.size != hi_w.size:
            converged = False
            vals = hi_w
        else:
            # second-order scheme: pairwise Richardson removes the h^2 term
            vals = (4.0 * hi_w - lo_w) / 3.0
        neg = int(np.sum(vals < -zero_tol))
        zero = int(np.sum(np.abs(vals) <= zero_tol))
        # classification is converged when no extrapolated eigenvalue sits
        # in the ambiguous band around the +-zero_tol boundary
        borderline = np.sum((np.abs(vals) > zero_tol)
                            & (np.abs(vals) <= 10.0 * zero_tol))
        if borderline:
            converged = False
        per_mode[l] = {"negative": neg, "zero": zero,
                       "smallest": float(vals[0]) if vals.size else None}
        weight = 1 if l == 0 else 2
        index += weight * neg
        nullity += weight * zero
        if neg == 0 and zero == 0:
            break
    return IndexNullity(index=index, nullity=nullity, converged=converged,
                        per_mode=per_mode, zero_tol=zero_tol)
