"""Normalized-eigenvalue values of the critical metrics and moduli scans.

The area-normalized eigenvalue of the metric rho(y) g_{a,b} attached to a
map with data (tau1, tau2, tau3) has the closed form

    lambda_bar = 4 pi^2 b (tau1 + tau2 - tau3) + 8 pi q sqrt(tau3 - tau1) E(m),

equal to twice the map energy 2 * int_0^b rho dy.  For (p, q, r) = (1, 1, 0)
it always beats both the flat value 4 pi^2 / b and the universal conformal
floor 8 pi, and it moves monotonically across moduli space: increasing in a,
decreasing in b, with derivatives carried by the Hopf constants
(dE = 2 H_im da + 2 H_re db).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from scipy.integrate import quad

from eqtorus.elliptic import complete_E, complete_K
from eqtorus.maps import ProfileSet, build_profiles, hopf_constants
from eqtorus.tau_solver import (
    InfeasibleParametersError,
    MapParams,
    ModuliPoint,
    TauTriple,
    classify_params,
    solve_n,
    solve_tau,
)

__all__ = [
    "FunctionalValue",
    "functional_value",
    "lambda_bar_closed_form",
    "lambda_bar_quadrature",
    "flat_lambda1",
    "xi_fn",
    "xi_tilde_fn",
    "hopf_derivative_check",
    "moduli_scan",
    "write_scan_csv",
    "SCAN_COLUMNS",
]

PETRIDES_FLOOR = 8.0 * math.pi


@dataclass(frozen=True)
class FunctionalValue:
    """Closed-form normalized eigenvalue with its comparison values."""

    lambda_bar: float
    quadrature_value: float
    flat_value: float
    petrides_floor: float
    n2: int | None = None

    @property
    def exceeds_flat(self) -> bool:
        return self.lambda_bar > self.flat_value

    @property
    def exceeds_floor(self) -> bool:
        return self.lambda_bar > self.petrides_floor

    @property
    def beats_both(self) -> bool:
        return self.exceeds_flat and self.exceeds_floor


def lambda_bar_closed_form(tau: TauTriple, params: MapParams,
                           point: ModuliPoint) -> float:
    t1, t2, t3 = tau.taus
    return (4.0 * math.pi**2 * point.b * (t1 + t2 - t3)
            + 8.0 * math.pi * params.q * math.sqrt(t3 - t1) * complete_E(tau.m))


def lambda_bar_quadrature(profiles: ProfileSet, epsabs: float = 1e-11) -> float:
    """2 * int_0^b rho dy by adaptive quadrature over one latitude period."""
    b = profiles.point.b
    per = b / profiles.params.q
    val, _ = quad(lambda y: float(profiles.rho(y)), 0.0, per,
                  epsabs=epsabs, epsrel=1e-12, limit=200)
    return 2.0 * val * profiles.params.q


def functional_value(tau: TauTriple, params: MapParams, point: ModuliPoint,
                     with_n2: bool = False) -> FunctionalValue:
    """Closed form, its quadrature cross-check, and the comparison values."""
    closed = lambda_bar_closed_form(tau, params, point)
    profiles = build_profiles(tau, params, point)
    quad_val = lambda_bar_quadrature(profiles)
    n2 = None
    if with_n2:
        from eqtorus.spectral import assemble_N2

        n2 = assemble_N2(tau, params, point).n2
    return FunctionalValue(lambda_bar=closed, quadrature_value=quad_val,
                           flat_value=flat_lambda1(point),
                           petrides_floor=PETRIDES_FLOOR, n2=n2)


def flat_lambda1(point: ModuliPoint) -> float:
    """Normalized first eigenvalue of the flat torus: 4 pi^2 b min |gamma*|^2.

    The dual lattice is spanned by (1, -a/b) and (0, 1/b); the minimum runs
    over a small integer window, which covers every reduced lattice.  On the
    standard moduli domain the value collapses to 4 pi^2 / b.
    """
    a, b = point.a, point.b
    best = math.inf
    for k in range(-2, 3):
        for j in range(-3, 4):
            if k == 0 and j == 0:
                continue
            best = min(best, k * k + (j - k * a) ** 2 / (b * b))
    return 4.0 * math.pi**2 * b * best


# --------------------------------------------------------------------------
# the comparison functions behind the (1,1,0) inequality
# --------------------------------------------------------------------------


def xi_fn(m: float) -> float:
    """(m - m/n0 - 1) K^2 + 2 K E with n0 the theta characteristic at target pi.

    Strictly above pi^2 on (0, 1), with limit pi^2 as m -> 0; governs the
    comparison of the (1,1,0) value with the flat one.
    """
    n0 = solve_n(math.pi, "theta", m)
    K = complete_K(m)
    return (m - m / n0 - 1.0) * K * K + 2.0 * K * complete_E(m)


def xi_tilde_fn(m: float) -> float:
    """xi(m) / sqrt(Psi(m)) for the (1,1,0) family; decreasing to 2 at m -> 1."""
    n0 = solve_n(math.pi, "theta", m)
    K = complete_K(m)
    psi = (1.0 - m / n0) * K * K  # (1/n1 - 1/n0) m K^2 with n1 = m
    return xi_fn(m) / math.sqrt(psi)


# --------------------------------------------------------------------------
# moduli derivatives via the Hopf constants
# --------------------------------------------------------------------------


def _energy(point: ModuliPoint, p=1, q=1, r=0) -> float:
    params = classify_params(point, p, q, r)
    tau = solve_tau(point, params)
    return 0.5 * lambda_bar_closed_form(tau, params, point)


def hopf_derivative_check(point: ModuliPoint, h: float = 1e-4) -> dict:
    """Finite-difference energy derivatives of the (1,1,0) family vs 2 H.

    Central differences with one Richardson step at h/2 for d E/d a and
    d E/d b; the holomorphicity of the Hopf differential predicts
    dE/da = 2 H_im and dE/db = 2 H_re.  Returns both sides and the errors.
    """
    a, b = point.a, point.b
    # small negative a is fine (the class is mirror symmetric); only the
    # constant-latitude boundary must stay strictly outside the stencil
    if (abs(a) + h) ** 2 + (b - h) ** 2 <= 1.0:
        raise ValueError("step crosses the circle-family boundary; shrink h")
    if abs(a) + h > 0.5:
        raise ValueError(f"a-step {a + h} leaves the |r+a|/q <= 1/2 region")

    def central(f, x0, step):
        return (f(x0 + step) - f(x0 - step)) / (2.0 * step)

    def richardson(f, x0):
        d1 = central(f, x0, h)
        d2 = central(f, x0, h / 2.0)
        return (4.0 * d2 - d1) / 3.0

    dE_da = richardson(lambda t: _energy(ModuliPoint(t, b)), a)
    dE_db = richardson(lambda t: _energy(ModuliPoint(a, t)), b)
    params = classify_params(point, 1, 1, 0)
    tau = solve_tau(point, params)
    hc = hopf_constants(build_profiles(tau, params, point))
    return {
        "dE_da": dE_da,
        "dE_db": dE_db,
        "two_h_im": 2.0 * hc.h_im,
        "two_h_re": 2.0 * hc.h_re,
        "err_a": abs(dE_da - 2.0 * hc.h_im),
        "err_b": abs(dE_db - 2.0 * hc.h_re),
    }


# --------------------------------------------------------------------------
# scans
# --------------------------------------------------------------------------

SCAN_COLUMNS = ["a", "b", "tau1", "tau2", "tau3", "m", "lambda_bar",
                "flat_value", "petrides_floor", "N2", "H_re", "H_im",
                "status"]


def _scan_row(a: float, b: float, p: int, q: int, r: int,
              with_n2: bool) -> dict:
    point = ModuliPoint(a, b)
    row = dict.fromkeys(SCAN_COLUMNS)
    row["a"], row["b"] = point.a, point.b
    try:
        params = classify_params(point, p, q, r)
        tau = solve_tau(point, params)
    except InfeasibleParametersError as exc:
        row["status"] = f"infeasible: {exc}"
        return row
    fv = functional_value(tau, params, point)
    hc = hopf_constants(build_profiles(tau, params, point))
    row.update(tau1=tau.tau1, tau2=tau.tau2, tau3=tau.tau3, m=tau.m,
               lambda_bar=fv.lambda_bar, flat_value=fv.flat_value,
               petrides_floor=fv.petrides_floor, H_re=hc.h_re, H_im=hc.h_im,
               status="ok")
    if with_n2:
        from eqtorus.spectral import assemble_N2

        row["N2"] = assemble_N2(tau, params, point).n2
    else:
        from eqtorus.spectral import n2_lower_bound

        # the ratio condition certifies equality with the counting bound,
        # making the Floquet sweep unnecessary for these rows
        rpa = abs(params.r + point.a_exact)
        if (3 * params.p**2 > params.q**2
                or 16 * rpa**2 < 3 * params.q**2):
            row["N2"] = n2_lower_bound(params, point)
    return row


def moduli_scan(a_values, b_values, p: int, q: int, r: int,
                with_n2: bool = False, jobs: int = 1) -> list[dict]:
    """Grid scan over (a, b); infeasible points are reported per row.

    Row order follows the grid index regardless of how work is scheduled.
    """
    grid = [(float(a), float(b)) for a in a_values for b in b_values]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_scan_row, a, b, p, q, r, with_n2)
                       for a, b in grid]
            return [f.result() for f in futures]
    return [_scan_row(a, b, p, q, r, with_n2) for a, b in grid]


def write_scan_csv(rows: list[dict], fh) -> None:
    """CSV with a header row; floats at 17 significant digits."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        out = []
        for key in SCAN_COLUMNS:
            val = row.get(key)
            if isinstance(val, float):
                out.append(f"{val:.17g}")
            elif val is None:
                out.append("")
            else:
                out.append(str(val))
        writer.writerow(out)
