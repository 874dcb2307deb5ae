"""Minimal members of the family: the Otsuki tori.

A map in the family is minimal iff it is conformal, which pins the data to
tau1 + tau2 = 1, tau3 = 1 (equivalently n0 = -m/(1-m), n1 = m, so r + a = 0).
The modulus is then the unique root of

    Omega(m) = sqrt((2-m)/(1-m)) Pi(-m/(1-m) | m) = pi p~/q~,

with Omega strictly decreasing from sqrt(2) pi/2 at m = 0 to pi/2 at m = 1;
hence only ratios p~/q~ in (1/2, sqrt(2)/2) occur.  The period follows from
b~ = (q~/pi) sqrt(2-m) K(m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from eqtorus.elliptic import complete_K, complete_Pi
from eqtorus.maps import build_profiles
from eqtorus.tau_solver import (
    InfeasibleParametersError,
    ModuliPoint,
    Regime,
    TauTriple,
    classify_params,
)

__all__ = [
    "OtsukiParams",
    "omega_fn",
    "solve_otsuki",
    "otsuki_tau_triple",
    "otsuki_map",
    "conformality_residual",
]

OMEGA_AT_0 = math.sqrt(2.0) * math.pi / 2.0
OMEGA_AT_1 = math.pi / 2.0

# below this distance from m = 1 the direct Carlson route starts losing
# digits to the K - Pi cancellation; switch to the exact tail reformulation
_ASYMPTOTE_CUT = 1e-9


def _omega_tail(eps: float) -> float:
    """Omega(1 - eps) without cancellation.

    Rescaling the defining integral puts the divergent part into an exact
    pi: Omega = sqrt(1+eps)/2 * (pi + sqrt(eps) * G(eps)) with (u = sqrt(t))

        G(eps) = 2 int_0^inf [sqrt(1+u^2)/sqrt(1+eps u^2) - 1] du / (eps+u^2),

    whose integrand is O(u) at 0 and O(u^{-2}/sqrt(eps)) at infinity.
    """

    def g(u: float) -> float:
        u2 = u * u
        return 2.0 * ((math.sqrt(1.0 + u2) / math.sqrt(1.0 + eps * u2) - 1.0)
                      / (eps + u2))

    scale = 1.0 / math.sqrt(eps)
    G = 0.0
    for lo, hi in ((0.0, 1.0), (1.0, scale)):
        val, _ = quad(g, lo, hi, epsabs=1e-12, epsrel=1e-11, limit=300)
        G += val
    # the (scale, inf) piece under u = scale/v becomes bounded on (0, 1]
    val, _ = quad(lambda v: g(scale / v) * scale / (v * v), 0.0, 1.0,
                  epsabs=1e-12, epsrel=1e-11, limit=300)
    G += val
    return math.sqrt(1.0 + eps) / 2.0 * (math.pi + math.sqrt(eps) * G)


def omega_fn(m: float) -> float:
    """sqrt((2-m)/(1-m)) Pi(-m/(1-m) | m), monotone decreasing on (0, 1).

    Endpoints are handled by their limits: sqrt(2) pi/2 at m = 0 and pi/2 at
    m = 1; near m = 1 an exact tail reformulation replaces the cancelling
    direct form.
    """
    m = float(m)
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"m={m!r} outside [0, 1]")
    if m == 0.0:
        return OMEGA_AT_0
    if m == 1.0:
        return OMEGA_AT_1
    eps = 1.0 - m
    if eps < _ASYMPTOTE_CUT:
        return _omega_tail(eps)
    return math.sqrt((2.0 - m) / eps) * complete_Pi(-m / eps, m)


@dataclass(frozen=True)
class OtsukiParams:
    """Solved data of one minimal torus: winding ratio, modulus, period."""

    p_t: int
    q_t: int
    m_star: float
    b_t: float


def solve_otsuki(p_t: int, q_t: int) -> OtsukiParams:
    """Solve Omega(m) = pi p~/q~ for coprime p~, q~ with p~/q~ in (1/2, sqrt2/2).

    The ratio-1/2 boundary is rejected: there the family degenerates (the
    maps stop being linearly full) and no minimal torus of this kind exists.
    """
    p_t, q_t = int(p_t), int(q_t)
    if p_t <= 0 or q_t <= 0 or math.gcd(p_t, q_t) != 1:
        raise InfeasibleParametersError(
            f"winding pair ({p_t}, {q_t}) must be positive and coprime")
    ratio = Fraction(p_t, q_t)
    if ratio <= Fraction(1, 2) or 2 * p_t * p_t >= q_t * q_t:
        raise InfeasibleParametersError(
            f"ratio {p_t}/{q_t} outside (1/2, sqrt(2)/2): no minimal torus")
    target = math.pi * p_t / q_t
    m_star = brentq(lambda m: omega_fn(m) - target, 1e-15, 1.0 - 1e-12,
                    xtol=1e-15, rtol=8.9e-16, maxiter=300)
    b_t = (q_t / math.pi) * math.sqrt(2.0 - m_star) * complete_K(m_star)
    return OtsukiParams(p_t=p_t, q_t=q_t, m_star=m_star, b_t=b_t)


def otsuki_tau_triple(m: float) -> TauTriple:
    """The conformal specialization tau1 = (1-m)/(2-m), tau2 = 1/(2-m), tau3 = 1."""
    t1 = (1.0 - m) / (2.0 - m)
    t2 = 1.0 / (2.0 - m)
    return TauTriple(tau1=t1, tau2=t2, tau3=1.0, m=m,
                     n0=-m / (1.0 - m), n1=m,
                     A=4.0 * math.pi**2,
                     c=2.0 * math.pi * math.sqrt(t1 * t2),
                     d=0.0)


def otsuki_map(params_ot: OtsukiParams, k: int = 1, r_t: int = 0):
    """(point, map params, tau, profiles) of the k-fold cover of the torus."""
    if k < 1:
        raise ValueError("cover degree k must be >= 1")
    point = ModuliPoint(-r_t, k * params_ot.b_t)
    params = classify_params(point, k * params_ot.p_t, k * params_ot.q_t, r_t)
    assert params.regime is Regime.NONLIMIT
    tau = otsuki_tau_triple(params_ot.m_star)
    return point, params, tau, build_profiles(tau, params, point)


def conformality_residual(map_like, n: int = 512) -> tuple[float, float]:
    """(max | |du/dx|^2 - |du/dy|^2 |, max |<du/dx, du/dy>|) over a y-grid.

    Both vanish (to 1e-8) exactly when the map is minimal, i.e. when
    A = 4 pi^2 and d = 0.
    """
    b = map_like.point.b
    y = np.linspace(0.0, b, n, endpoint=False) + 0.173 * b / n
    x = 0.41
    dx1, dx2 = map_like.dx_values(x, y)
    dy1, dy2 = map_like.dy_values(x, y)
    nx2 = np.abs(dx1) ** 2 + np.abs(dx2) ** 2
    ny2 = np.abs(dy1) ** 2 + np.abs(dy2) ** 2
    inner = (dx1.conjugate() * dy1 + dx2.conjugate() * dy2).real
    return float(np.max(np.abs(nx2 - ny2))), float(np.max(np.abs(inner)))
