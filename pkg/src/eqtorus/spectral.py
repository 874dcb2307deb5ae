"""Floquet eigenvalue counting for the weighted Hill problems

    -h''(y) + 4 pi^2 l^2 h(y) = lambda rho(y) h(y),
    h(y + b) = e^{-2 pi i l a} h(y),

one problem per Fourier mode l of the torus Laplacian for the conformal
metric rho(y) g_{a,b}.  An eigenvalue is a lambda where the monodromy matrix
M(lambda) over one period has trace equal to 2 cos(2 pi l a); in the periodic
and antiperiodic cases tangencies of the trace with +-2 carry multiplicity 2.

The mode counts assemble into the Weyl count N(2) of the metric:

    N(2) = 1 + #{0 < lambda_j(0) < 2} + 2 * sum_{l >= 1} #{lambda_j(l) < 2},

where the leading 1 is the flat zero mode (constants, lambda = 0).  Modes
with l^2 >= tau2 + tau3 - tau1 cannot contribute: the Rayleigh quotient gives
lambda_0(l) >= 4 pi^2 l^2 / max(rho) = 2 l^2 / (tau2 + tau3 - tau1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from eqtorus.config import tolerances
from eqtorus.maps import ProfileSet, build_profiles
from eqtorus.tau_solver import (
    MapParams,
    ModuliPoint,
    TauTriple,
    classify_params,
    phi_fn,
    solve_n,
    solve_tau,
)

__all__ = [
    "SLProblem",
    "ModeCount",
    "SpectrumReport",
    "sl_problem",
    "monodromy",
    "count_below",
    "assemble_N2",
    "n2_lower_bound",
    "construct_strict_instance",
]

TWO_PI = 2.0 * math.pi

# eigenvalues this close to the threshold are the analytic boundary
# eigenvalues (the map components), classified "at threshold", not counted
AT_THRESHOLD_TOL = 1e-7
# polished |trace - 2 cos phase| below this at a trace extremum marks a
# closed gap: a double eigenvalue of the (anti)periodic problem
TANGENCY_TOL = 1e-6
CLUSTER_TOL = 1e-9


@dataclass(frozen=True)
class SLProblem:
    """One Fourier-mode Hill problem with its Floquet boundary phase."""

    l: int
    rho: object  # vectorized y -> rho(y) > 0, period b
    b: float
    bc_phase: float           # 2 pi l a mod 2 pi
    bc_type: str              # periodic | antiperiodic | generic
    rho_max: float

    @property
    def trace_target(self) -> float:
        return 2.0 * math.cos(self.bc_phase)


def sl_problem(profiles: ProfileSet, l: int) -> SLProblem:
    """Hill problem of mode l for the metric induced by the given map."""
    point = profiles.point
    la = l * point.a_exact
    if la.denominator == 1:
        bc = "periodic"
    elif (2 * la).denominator == 1:
        bc = "antiperiodic"
    else:
        bc = "generic"
    phase = TWO_PI * float(la - math.floor(la))
    t1, t2, t3 = profiles.tau.taus
    rho_max = 2.0 * math.pi**2 * (t2 + t3 - t1)
    return SLProblem(l=int(l), rho=profiles.rho, b=point.b, bc_phase=phase,
                     bc_type=bc, rho_max=rho_max)


# --------------------------------------------------------------------------
# monodromy
# --------------------------------------------------------------------------


def monodromy(problem: SLProblem, lam: float, rtol: float | None = None):
    """Fundamental solution matrix over [0, b] by adaptive Runge-Kutta.

    Columns are the solutions with (h, h')(0) = (1, 0) and (0, 1); the
    Wronskian keeps det M = 1, which the caller may use as a health check.
    """
    if rtol is None:
        rtol = tolerances().ode_rtol
    k2 = 4.0 * math.pi**2 * problem.l**2

    def rhs(y, state):
        g = k2 - lam * float(problem.rho(y))
        h1, v1, h2, v2 = state
        return [v1, g * h1, v2, g * h2]

    sol = solve_ivp(rhs, (0.0, problem.b), [1.0, 0.0, 0.0, 1.0],
                    method="DOP853", rtol=rtol, atol=1e-13, dense_output=False)
    if not sol.success:  # pragma: no cover
        raise RuntimeError(f"monodromy integration failed: {sol.message}")
    h1, v1, h2, v2 = sol.y[:, -1]
    return np.array([[h1, h2], [v1, v2]])


def _trace_accurate(problem: SLProblem, lam: float) -> float:
    M = monodromy(problem, lam)
    return float(M[0, 0] + M[1, 1])


def _rk4_steps(problem: SLProblem, lam_max: float) -> int:
    # fixed-step RK4 phase error ~ (omega b)^5 / (120 n^4); size n for ~1e-10
    omega = math.sqrt(max(lam_max * problem.rho_max,
                          4.0 * math.pi**2 * problem.l**2, 1.0))
    theta = omega * problem.b
    n = int((theta**5 / (120.0 * 1e-10)) ** 0.25) + 1
    return min(max(n, 800), 60000)


def _trace_grid(problem: SLProblem, lams: np.ndarray) -> np.ndarray:
    """trace M(lambda) for a whole grid of lambdas at once (fixed-step RK4).

    Both fundamental solutions propagate as one (2, n_lam) state, so the
    whole lambda sweep costs a single pass over the y-mesh.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    n = _rk4_steps(problem, float(np.max(lams)))
    h = problem.b / n
    y_nodes = np.linspace(0.0, problem.b, 2 * n + 1)
    rho = np.asarray(problem.rho(y_nodes), dtype=float)
    k2 = 4.0 * math.pi**2 * problem.l**2
    nl = lams.size
    H = np.zeros((2, nl))
    V = np.zeros((2, nl))
    H[0] = 1.0
    V[1] = 1.0
    h6 = h / 6.0
    for i in range(n):
        g0 = k2 - lams * rho[2 * i]
        gm = k2 - lams * rho[2 * i + 1]
        g1 = k2 - lams * rho[2 * i + 2]
        k1v = g0 * H
        k2h = V + 0.5 * h * k1v
        k2v = gm * (H + 0.5 * h * V)
        k3h = V + 0.5 * h * k2v
        k3v = gm * (H + 0.5 * h * k2h)
        k4h = V + h * k3v
        k4v = g1 * (H + h * k3h)
        H += h6 * (V + 2.0 * k2h + 2.0 * k3h + k4h)
        V += h6 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return H[0] + V[1]


# --------------------------------------------------------------------------
# counting
# --------------------------------------------------------------------------


@dataclass
class ModeCount:
    l: int
    count: int
    eigenvalues: list[float] = field(default_factory=list)
    at_threshold: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def _window_poly(lams, F, i, half: int = 3):
    lo = max(0, i - half)
    hi = min(len(lams), i + half + 1)
    xs = lams[lo:hi]
    return np.polynomial.polynomial.Polynomial.fit(xs, F[lo:hi], deg=len(xs) - 1)


def _poly_real_roots(poly, lo: float, hi: float) -> list[float]:
    roots = poly.roots()
    out = [float(r.real) for r in roots
           if abs(r.imag) < 1e-9 and lo <= r.real <= hi]
    return sorted(out)


def count_below(problem: SLProblem, threshold: float = 2.0,
                grid_points: int = 2000) -> ModeCount:
    """Count eigenvalues strictly below the threshold, with multiplicity.

    Scans trace(M(lambda)) - 2 cos(phase) on a grid over (0, threshold],
    refines sign changes by bisection on local interpolants of the trace,
    counts (anti)periodic trace tangencies (closed spectral gaps) with
    multiplicity 2, and classifies eigenvalues within AT_THRESHOLD_TOL of
    the threshold as boundary eigenvalues that do not count.  For l = 0 the
    flat zero mode lambda = 0 is excluded by starting the scan at 1e-9.

    Tangency windows are re-sampled on fine local grids (one batched ODE
    sweep for all windows) so that the extremal trace value is resolved to
    integrator accuracy before the closed/open gap decision.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    out = ModeCount(l=problem.l, count=0)
    target = problem.trace_target
    # uniform in sqrt(lambda): eigenvalues of a Hill problem grow ~ j^2, so
    # this spaces the scan nodes evenly between consecutive eigenvalues
    lams = np.linspace(math.sqrt(1e-9), math.sqrt(threshold), grid_points) ** 2
    F = _trace_grid(problem, lams) - target

    roots: list[float] = []
    # plain sign changes, refined on the 7-node window interpolant
    sign = np.sign(F)
    crossing_cells = [i for i in range(len(lams) - 1)
                      if sign[i] != 0.0 and sign[i + 1] != 0.0
                      and sign[i] != sign[i + 1]]
    for i in crossing_cells:
        poly = _window_poly(lams, F, i)
        try:
            roots.append(float(brentq(poly, lams[i], lams[i + 1], xtol=1e-12)))
        except ValueError:  # interpolation noise at a grazing crossing
            roots.append(0.5 * (lams[i] + lams[i + 1]))

    # candidate tangency windows: local minima of |F| without a crossing;
    # only the (anti)periodic problems can carry double eigenvalues
    windows: list[int] = []
    if problem.bc_type in ("periodic", "antiperiodic"):
        absF = np.abs(F)
        for i in range(1, len(lams) - 1):
            if not (absF[i] <= absF[i - 1] and absF[i] <= absF[i + 1]):
                continue
            # 3-point parabola vertex estimate makes the trigger independent
            # of the (possibly huge) trace curvature
            curv = F[i + 1] - 2.0 * F[i] + F[i - 1]
            if curv != 0.0:
                f_vert = F[i] - (F[i + 1] - F[i - 1]) ** 2 / (8.0 * curv)
            else:
                f_vert = F[i]
            if abs(f_vert) > 1e-3 and absF[i] > 1e-2:
                continue
            if any(lams[i - 1] <= r <= lams[i + 1] for r in roots):
                continue
            windows.append(i)

    if windows:
        fine_n = 17
        fine_grids = [np.linspace(lams[i - 1], lams[i + 1], fine_n)
                      for i in windows]
        fine_F = _trace_grid(problem, np.concatenate(fine_grids)) - target
        for w, i in enumerate(windows):
            xs = fine_grids[w]
            ys = fine_F[w * fine_n:(w + 1) * fine_n]
            poly = np.polynomial.polynomial.Polynomial.fit(xs, ys, deg=8)
            crossings = _poly_real_roots(poly, xs[0], xs[-1])
            if crossings:
                # an open gap narrower than the coarse grid: two real roots
                roots.extend(crossings)
                continue
            verts = _poly_real_roots(poly.deriv(), xs[0], xs[-1])
            if not verts:
                continue
            lam_v = min(verts, key=lambda v: abs(poly(v)))
            f_v = float(poly(lam_v))
            if abs(f_v) <= TANGENCY_TOL:
                roots.extend([lam_v, lam_v])  # closed gap: multiplicity 2
            elif abs(f_v) <= 1e-4:
                out.warnings.append(
                    f"l={problem.l}: near tangency at lambda={lam_v:.9g} "
                    f"with residual {f_v:.3g} left uncounted")

    roots.sort()
    for i in range(len(roots) - 1):
        if 0.0 < roots[i + 1] - roots[i] < CLUSTER_TOL:
            out.warnings.append(
                f"l={problem.l}: unresolved multiplicity near {roots[i]:.9g}")
    if roots:
        # certify every root against one batched integrator pass
        residuals = np.abs(_trace_grid(problem, np.array(roots)) - target)
        bad = residuals > 1e-5 * max(1.0, abs(target))
        for r, res in zip(np.array(roots)[bad], residuals[bad]):
            out.warnings.append(
                f"l={problem.l}: root at {r:.9g} has trace residual {res:.3g}")
    for r in roots:
        if r < threshold - AT_THRESHOLD_TOL:
            out.eigenvalues.append(r)
        else:
            out.at_threshold.append(r)
    out.count = len(out.eigenvalues)
    return out


# --------------------------------------------------------------------------
# assembly
# --------------------------------------------------------------------------


@dataclass
class SpectrumReport:
    counts_below_2: list[ModeCount]
    n2: int
    bound_rhs: int
    equality: bool
    sufficient_condition_met: bool   # tau2 + tau3 - tau1 <= 4
    ratio_condition_met: bool        # p/q > 1/sqrt(3) or |r+a|/q < sqrt(3)/4
    tau_sum: float
    trace_certificates: dict
    warnings: list[str] = field(default_factory=list)


def n2_lower_bound(params: MapParams, point: ModuliPoint) -> int:
    """2p - 1 + delta_{2p,q} + 2(ceil(2|r+a| - 1) + delta_{r+a,0})."""
    rpa = params.r + point.a_exact
    delta_first = 1 if 2 * params.p == params.q else 0
    delta_zero = 1 if rpa == 0 else 0
    return (2 * params.p - 1 + delta_first
            + 2 * (math.ceil(2 * abs(rpa) - 1) + delta_zero))


def assemble_N2(tau: TauTriple, params: MapParams, point: ModuliPoint,
                grid_points: int = 2000) -> SpectrumReport:
    """Exact N(2) by mode-by-mode Floquet counting.

    The mode loop stops at l_max = ceil(sqrt(tau2+tau3-tau1)): beyond it the
    Rayleigh bound forces lambda_0(l) >= 2.  Emits certificates
    |trace M(2) - 2 cos(2 pi l a)| for l = 0, 1, where the map components
    are exact eigenfunctions with eigenvalue 2.
    """
    profiles = build_profiles(tau, params, point)
    tau_sum = tau.tau2 + tau.tau3 - tau.tau1
    l_max = math.ceil(math.sqrt(tau_sum))
    counts = []
    warnings: list[str] = []
    for l in range(l_max + 1):
        problem = sl_problem(profiles, l)
        mc = count_below(problem, threshold=2.0, grid_points=grid_points)
        counts.append(mc)
        warnings.extend(mc.warnings)
    n2 = 1 + counts[0].count + 2 * sum(mc.count for mc in counts[1:])
    bound = n2_lower_bound(params, point)
    certs = {}
    for l in (0, 1):
        problem = sl_problem(profiles, l)
        certs[l] = abs(_trace_accurate(problem, 2.0) - problem.trace_target)
    rpa = abs(params.r + point.a_exact)
    ratio_cond = (Fraction(params.p, params.q) ** 2 > Fraction(1, 3)
                  or 16 * rpa**2 < 3 * params.q**2)
    return SpectrumReport(
        counts_below_2=counts,
        n2=n2,
        bound_rhs=bound,
        equality=(n2 == bound),
        sufficient_condition_met=(tau_sum <= 4.0),
        ratio_condition_met=bool(ratio_cond),
        tau_sum=tau_sum,
        trace_certificates=certs,
        warnings=warnings,
    )


# --------------------------------------------------------------------------
# a certified instance with strict inequality N(2) > bound
# --------------------------------------------------------------------------


def _T_fn(m: float, n0: float, n1: float) -> float:
    """tau1 + tau3 - tau2 expressed in (m, n0, n1)."""
    return n1 / (n1 - n0) * (1.0 - n0 / m + n0)


def construct_strict_instance(seed=(Fraction(1, 6), -6.0, Fraction(9, 10)),
                              max_denominator: int = 60):
    """Parameters (a, b, p, q, r) whose Weyl count exceeds the lower bound.

    Recipe: starting from the seed (m, n0~, n1) with T = tau1+tau3-tau2 > 4,
    snap the theta-branch value Phi(n0|m)/pi to a nearby rational p0/q0,
    re-solve n0, scale q = k q0 until b = (q/pi) sqrt((1/n1-1/n0) m) K(m)
    exceeds max(1, 1/sqrt(T0-4)), and read (r, a) off the alpha-branch value.
    Then lambda_0(2) < 2 by the plane-wave test function, so the l = 2 mode
    contributes and N(2) is strictly above the bound.

    Returns (point, params, certificate) where the certificate carries the
    seed check, the solved instance data and the Floquet count of mode 2.
    """
    m = float(seed[0])
    n0_seed = float(seed[1])
    n1 = float(seed[2])
    if not _T_fn(m, n0_seed, n1) > 4.0:
        raise ValueError("seed does not satisfy T > 4")

    x = phi_fn(n0_seed, m) / math.pi
    frac = None
    for den in range(3, max_denominator + 1):
        cand = Fraction(x).limit_denominator(den)
        if cand <= Fraction(1, 2):
            continue
        n0 = solve_n(math.pi * float(cand), "theta", m)
        if _T_fn(m, n0, n1) > 4.0:
            frac = cand
            break
    if frac is None:
        raise RuntimeError(
            f"no rational theta target with denominator <= {max_denominator} "
            "keeps T > 4 near the seed")
    p0, q0 = frac.numerator, frac.denominator
    n0 = solve_n(math.pi * p0 / q0, "theta", m)
    T0 = _T_fn(m, n0, n1)

    from eqtorus.elliptic import complete_K

    b_unit = (1.0 / math.pi) * math.sqrt((1.0 / n1 - 1.0 / n0) * m) * complete_K(m)
    b_floor = max(1.0, 1.0 / math.sqrt(T0 - 4.0))
    k = 1
    while k * q0 * b_unit <= b_floor:
        k += 1
    p, q = k * p0, k * q0
    b = q * b_unit

    eta = phi_fn(n1, m) / math.pi
    frac_part = eta * q - math.floor(eta * q)
    if frac_part <= 0.5:
        r, a = math.floor(eta * q), frac_part
    else:
        r, a = math.floor(-eta * q), (-eta * q) - math.floor(-eta * q)

    point = ModuliPoint(a, b)
    params = classify_params(point, p, q, r)
    tau = solve_tau(point, params)
    profiles = build_profiles(tau, params, point)
    mode2 = count_below(sl_problem(profiles, 2), threshold=2.0)
    certificate = {
        "seed_T": _T_fn(m, n0_seed, n1),
        "T0": T0,
        "m": m,
        "n0": n0,
        "n1": n1,
        "p0_q0": (p0, q0),
        "k": k,
        "b_floor": b_floor,
        "plane_wave_bound": 8.0 * (a * a / (b * b) + 1.0) / T0,
        "lambda0_2": mode2.eigenvalues[0] if mode2.eigenvalues else None,
        "mode2_count": mode2.count,
        "tau": tau,
    }
    return point, params, certificate
