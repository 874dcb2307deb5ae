"""Profiles and evaluators for the equivariant harmonic maps into S^3.

A map is (cos phi(y) e^{i theta(y)}, sin phi(y) e^{i(2 pi x + alpha(y))}) on
the plane, descending to the torus R^2 / (Z(1,0) + Z(a,b)).  The latitude
profile runs through four branches depending on which limit case holds; the
universal quantities are

    cos^2 phi(y) = tau1 + (tau2 - tau1) sn^2(w y | m),   w = 2 pi sqrt(tau3 - tau1),
    rho(y)       = 2 pi^2 (tau1 + tau2 + tau3 - 2 cos^2 phi(y)),

and the angular profiles integrate the first-order relations
theta' = c / cos^2 phi, alpha' = d / sin^2 phi into incomplete third-kind
integrals with quasi-periodically extended amplitude.

The constant-latitude ("circle") family lives on the boundary
(r+a)^2 + b^2 = p^2 and is exactly harmonic with constant energy density.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from eqtorus.elliptic import incomplete_Pi, jacobi_sn_cn_dn_am
from eqtorus.tau_solver import (
    CIRCLE_TOL,
    InfeasibleParametersError,
    MapParams,
    ModuliPoint,
    Regime,
    TauTriple,
)

__all__ = [
    "ProfileSet",
    "SpherePoint",
    "CircleMap",
    "HopfConstants",
    "build_profiles",
    "eval_map",
    "build_circle_map",
    "harmonicity_residual",
    "hopf_constants",
    "hopf_grid_residual",
    "export_mesh",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SpherePoint:
    """A point of S^3 as a pair of complex coordinates."""

    z1: complex
    z2: complex

    @property
    def norm_defect(self) -> float:
        return abs(abs(self.z1) ** 2 + abs(self.z2) ** 2 - 1.0)


class ProfileSet:
    """Evaluable closed forms phi, theta, alpha, rho of one harmonic map.

    Immutable after construction; all evaluators are vectorized in y and
    pure.  theta and alpha are globally smooth (unwrapped) and satisfy
    theta(y+b) = theta(y) + 2 pi p, alpha(y+b) = alpha(y) - 2 pi (r+a).
    """

    def __init__(self, tau: TauTriple, params: MapParams, point: ModuliPoint):
        if params.regime is Regime.CIRCLE_FAMILY:
            raise InfeasibleParametersError(
                "circle-family parameters: use build_circle_map")
        self.tau = tau
        self.params = params
        self.point = point
        self.w = TWO_PI * math.sqrt(tau.tau3 - tau.tau1)
        self.rpa = params.r_plus_a(point)
        t1, t2, t3 = tau.taus
        self._dt = t2 - t1
        self._sigma = t1 + t2 + t3
        # prefactors of the incomplete third-kind integrals; zero in the
        # branches where the corresponding angle is constant
        if tau.c > 0.0:
            self._pref_theta = math.sqrt(t2 * t3 / (t1 * (t3 - t1)))
        else:
            self._pref_theta = 0.0
        if tau.d != 0.0:
            self._pref_alpha = -math.copysign(1.0, self.rpa) * math.sqrt(
                (1.0 - t2) * (t3 - 1.0) / ((1.0 - t1) * (t3 - t1)))
        else:
            self._pref_alpha = 0.0

    # -- scalar profiles -------------------------------------------------

    def _sn_cn_dn_am(self, y):
        return jacobi_sn_cn_dn_am(self.w * np.asarray(y, dtype=float), self.tau.m)

    def cos2_phi(self, y):
        sn = self._sn_cn_dn_am(y)[0]
        return self.tau.tau1 + self._dt * sn * sn

    def cos_sin_phi(self, y):
        """(cos phi, sin phi) with the branch-correct signs."""
        t1, t2, _ = self.tau.taus
        sn, cn, _, _ = self._sn_cn_dn_am(y)
        reg = self.params.regime
        if reg is Regime.NONLIMIT:
            c2 = t1 + self._dt * sn * sn
            return np.sqrt(c2), np.sqrt(1.0 - c2)
        if reg is Regime.FIRST_LIMIT:
            cphi = math.sqrt(t2) * sn
            return cphi, np.sqrt(1.0 - cphi * cphi)
        if reg is Regime.SECOND_LIMIT:
            sphi = math.sqrt(1.0 - t1) * cn
            return np.sqrt(1.0 - sphi * sphi), sphi
        # hybrid: phi = pi/2 - am, so cos phi = sn, sin phi = cn
        return sn, cn

    def phi(self, y):
        cphi, sphi = self.cos_sin_phi(y)
        if self.params.regime is Regime.HYBRID_LIMIT:
            # unwrapped: phi = pi/2 - am(w y | m), monotone in y
            am = self._sn_cn_dn_am(y)[3]
            return math.pi / 2 - am
        return np.arctan2(sphi, cphi)

    def theta(self, y):
        if self._pref_theta == 0.0:
            return np.zeros_like(np.asarray(y, dtype=float))
        am = self._sn_cn_dn_am(y)[3]
        return self._pref_theta * incomplete_Pi(self.tau.n0, am, self.tau.m)

    def alpha(self, y):
        if self._pref_alpha == 0.0:
            return np.zeros_like(np.asarray(y, dtype=float))
        am = self._sn_cn_dn_am(y)[3]
        return self._pref_alpha * incomplete_Pi(self.tau.n1, am, self.tau.m)

    def rho(self, y):
        return 2.0 * math.pi**2 * (self._sigma - 2.0 * self.cos2_phi(y))

    # -- derivatives (closed forms) --------------------------------------

    def dphi(self, y):
        t1, t2, _ = self.tau.taus
        sn, cn, dn, _ = self._sn_cn_dn_am(y)
        reg = self.params.regime
        if reg is Regime.NONLIMIT:
            c2 = t1 + self._dt * sn * sn
            return -self._dt * self.w * sn * cn * dn / np.sqrt(c2 * (1.0 - c2))
        if reg is Regime.FIRST_LIMIT:
            rt = math.sqrt(t2)
            return -rt * self.w * cn * dn / np.sqrt(1.0 - t2 * sn * sn)
        if reg is Regime.SECOND_LIMIT:
            rt = math.sqrt(1.0 - t1)
            return rt * self.w * (-sn) * dn / np.sqrt(1.0 - (1.0 - t1) * cn * cn)
        return -self.w * dn

    def dtheta(self, y):
        if self.tau.c == 0.0:
            return np.zeros_like(np.asarray(y, dtype=float))
        return self.tau.c / self.cos2_phi(y)

    def dalpha(self, y):
        if self.tau.d == 0.0:
            return np.zeros_like(np.asarray(y, dtype=float))
        return self.tau.d / (1.0 - self.cos2_phi(y))

    # -- the map and its y-derivative ------------------------------------

    def map_values(self, x, y):
        """(z1, z2) complex arrays at flat coordinates (x, y)."""
        cphi, sphi = self.cos_sin_phi(y)
        th = self.theta(y)
        al = self.alpha(y)
        psi = TWO_PI * np.asarray(x, dtype=float) + al
        return cphi * np.exp(1j * th), sphi * np.exp(1j * psi)

    def dy_values(self, x, y):
        cphi, sphi = self.cos_sin_phi(y)
        th, al = self.theta(y), self.alpha(y)
        dphi, dth, dal = self.dphi(y), self.dtheta(y), self.dalpha(y)
        psi = TWO_PI * np.asarray(x, dtype=float) + al
        dz1 = (-dphi * sphi + 1j * dth * cphi) * np.exp(1j * th)
        dz2 = (dphi * cphi + 1j * dal * sphi) * np.exp(1j * psi)
        return dz1, dz2

    def dx_values(self, x, y):
        z2 = self.map_values(x, y)[1]
        return np.zeros_like(z2), TWO_PI * 1j * z2


def build_profiles(tau: TauTriple, params: MapParams,
                   point: ModuliPoint) -> ProfileSet:
    """Profile set of u^{p,q,r}_{a,b}; branch selected by params.regime."""
    return ProfileSet(tau, params, point)


def eval_map(profiles, x: float, y: float) -> SpherePoint:
    """Evaluate the map at one flat coordinate pair."""
    z1, z2 = profiles.map_values(float(x), float(y))
    return SpherePoint(complex(z1), complex(z2))


class CircleMap:
    """Constant-latitude harmonic map on the boundary (r+a)^2 + b^2 = p^2.

    (cos phi0 e^{2 pi i p y / b}, sin phi0 e^{2 pi i (b x - (r+a) y)/b});
    exactly harmonic with constant energy density 2 pi^2 p^2 / b^2.
    """

    def __init__(self, point: ModuliPoint, p: int, r: int, phi0: float):
        gap = (r + point.a) ** 2 + point.b**2 - p * p
        if abs(gap) > CIRCLE_TOL:
            raise InfeasibleParametersError(
                f"(r+a)^2 + b^2 - p^2 = {gap}; the constant-latitude family "
                "lives only on that boundary")
        if not 0.0 <= phi0 <= math.pi / 2:
            raise ValueError(f"latitude phi0={phi0} outside [0, pi/2]")
        self.point = point
        self.p = int(p)
        self.r = int(r)
        self.phi0 = float(phi0)
        self.rpa = r + point.a
        b = point.b
        A, B = math.cos(phi0), math.sin(phi0)
        self.energy_density = (2.0 * math.pi**2 / b**2) * (
            p * p * A * A + (b * b + self.rpa**2) * B * B)
        self._freq1 = TWO_PI * p / b
        self._freq2 = TWO_PI * self.rpa / b

    def map_values(self, x, y):
        xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float),
                                     np.asarray(y, dtype=float))
        z1 = math.cos(self.phi0) * np.exp(1j * self._freq1 * yb)
        z2 = math.sin(self.phi0) * np.exp(1j * (TWO_PI * xb - self._freq2 * yb))
        return z1, z2

    def rho(self, y):
        return np.full_like(np.asarray(y, dtype=float), self.energy_density)

    def d2y_values(self, x, y):
        z1, z2 = self.map_values(x, y)
        return -self._freq1**2 * z1, -self._freq2**2 * z2

    def dy_values(self, x, y):
        z1, z2 = self.map_values(x, y)
        return 1j * self._freq1 * z1, -1j * self._freq2 * z2

    def dx_values(self, x, y):
        z2 = self.map_values(x, y)[1]
        return np.zeros_like(z2), TWO_PI * 1j * z2


def build_circle_map(point: ModuliPoint, p: int, r: int, phi0: float) -> CircleMap:
    return CircleMap(point, p, r, phi0)


# --------------------------------------------------------------------------
# numerical certification
# --------------------------------------------------------------------------


def _stack4(z1, z2):
    """Real 4-vector view (Re z1, Im z1, Re z2, Im z2) stacked on axis 0."""
    return np.stack([z1.real, z1.imag, z2.real, z2.imag])


def harmonicity_residual(map_like, n: int = 1000, h: float = 1e-4) -> float:
    """Max norm of the tension field against the sphere constraint.

    Evaluates |d2u/dx2 + d2u/dy2 + 2 e(u) u| on an n-point y-grid; the x
    second derivative is analytic (-4 pi^2 z2), the y one comes from the
    map's exact formula when available and a 4th-order five-point stencil
    otherwise.  Equivariance makes the residual independent of x.
    """
    b = map_like.point.b
    y = np.linspace(0.0, b, n, endpoint=False) + 0.31 * b / n
    x = 0.0
    z1, z2 = map_like.map_values(x, y)
    if hasattr(map_like, "d2y_values"):
        d2y1, d2y2 = map_like.d2y_values(x, y)
    else:
        stencil = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)]
        d2y1 = np.zeros_like(z1)
        d2y2 = np.zeros_like(z2)
        for k, wgt in stencil:
            zz1, zz2 = map_like.map_values(x, y + k * h)
            d2y1 += wgt * zz1
            d2y2 += wgt * zz2
        d2y1 /= 12.0 * h * h
        d2y2 /= 12.0 * h * h
    rho = map_like.rho(y)
    res1 = d2y1 + 2.0 * rho * z1
    res2 = d2y2 - 4.0 * math.pi**2 * z2 + 2.0 * rho * z2
    norms = np.sqrt(np.abs(res1) ** 2 + np.abs(res2) ** 2)
    return float(np.max(norms))


@dataclass(frozen=True)
class HopfConstants:
    """Constant components of <d_z u, d_z u>; h_re = pi^2 - A/4, h_im = -pi d."""

    h_re: float
    h_im: float


def hopf_constants(profiles: ProfileSet) -> HopfConstants:
    return HopfConstants(h_re=math.pi**2 - profiles.tau.A / 4.0,
                         h_im=-math.pi * profiles.tau.d + 0.0)


def hopf_grid_residual(map_like, n: int = 64):
    """Sampled (4 H_re, 4 H_im) from first derivatives on a y-grid.

    Returns (mean_re, mean_im, max_std) where max_std bounds the pointwise
    deviation of either component from its mean; a harmonic torus must make
    this machine-small since the Hopf differential is holomorphic.
    """
    b = map_like.point.b
    y = np.linspace(0.0, b, n, endpoint=False) + 0.137 * b / n
    x = 0.29
    dx = _stack4(*map_like.dx_values(x, y))
    dy = _stack4(*map_like.dy_values(x, y))
    re4 = np.sum(dx * dx, axis=0) - np.sum(dy * dy, axis=0)
    im4 = -2.0 * np.sum(dx * dy, axis=0)
    spread = max(float(np.max(re4) - np.min(re4)),
                 float(np.max(im4) - np.min(im4)))
    return float(np.mean(re4)) / 4.0, float(np.mean(im4)) / 4.0, spread / 4.0


def export_mesh(map_like, nx: int, ny: int, fh) -> int:
    """Write an nx-by-ny vertex grid as JSON lines; returns the record count.

    One record per vertex: x, y, re_z1, im_z1, re_z2, im_z2, serialized at
    17 significant digits.  ``fh`` is an open text file handle.
    """
    b = map_like.point.b
    count = 0
    for i in range(nx):
        x = i / nx
        ys = np.linspace(0.0, b, ny, endpoint=False)
        z1, z2 = map_like.map_values(x, ys)
        z1 = np.broadcast_to(z1, ys.shape)
        z2 = np.broadcast_to(z2, ys.shape)
        for j in range(ny):
            rec = {
                "x": float(f"{x:.17g}"),
                "y": float(f"{ys[j]:.17g}"),
                "re_z1": float(f"{z1[j].real:.17g}"),
                "im_z1": float(f"{z1[j].imag:.17g}"),
                "re_z2": float(f"{z2[j].real:.17g}"),
                "im_z2": float(f"{z2[j].imag:.17g}"),
            }
            fh.write(json.dumps(rec) + "\n")
            count += 1
    return count
