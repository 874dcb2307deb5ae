#!/usr/bin/env python3
"""The minimal members of the family: solve the winding equation, verify
conformality, and export a vertex mesh of the torus in S^3.

Run:  python3 demos/03_otsuki_tori.py
"""

import math

import numpy as np

from eqtorus import conformality_residual, omega_fn, otsuki_map, solve_otsuki
from eqtorus.maps import export_mesh, harmonicity_residual

print("the winding function Omega on (0,1):")
print(f"{'m':>8} {'Omega(m)':>12} {'Omega(m)/pi':>12}")
for m in (0.0, 0.2, 0.5, 0.8, 0.95, 1.0):
    v = omega_fn(m)
    print(f"{m:>8} {v:>12.8f} {v / math.pi:>12.8f}")
print("strictly decreasing from sqrt(2)pi/2 to pi/2, so exactly the ratios "
      "p/q in (1/2, sqrt(2)/2)\nadmit a minimal torus.\n")

for pt_, qt in [(2, 3), (3, 5), (5, 8)]:
    ot = solve_otsuki(pt_, qt)
    point, params, tau, prof = otsuki_map(ot)
    diag, off = conformality_residual(prof)
    print(f"ratio {pt_}/{qt}:  m* = {ot.m_star:.12f},  period b~ = {ot.b_t:.8f}")
    print(f"   conformality residuals  | |du/dx|^2 - |du/dy|^2 | = {diag:.1e},"
          f"  |<du/dx, du/dy>| = {off:.1e}")
    print(f"   harmonicity residual    {harmonicity_residual(prof, n=300):.1e}")

ot = solve_otsuki(2, 3)
point, params, tau, prof = otsuki_map(ot)
path = "otsuki_2_3_mesh.jsonl"
with open(path, "w", encoding="utf-8") as fh:
    n = export_mesh(prof, 32, 64, fh)
print(f"\nwrote {n} mesh vertices of the 2/3 torus to {path}")
