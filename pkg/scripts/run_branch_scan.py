#!/usr/bin/env python3
"""Survey the branch machinery: jump samples, branch rotations, dense search.

Equivalent CLI for the jump part: fracflux jump-scan configs/demo.cfg --out out/demo
"""

import pathlib
import sys

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from fracflux.config import load_config
from fracflux.laplace import branch_orbit_size, branch_search, jump, make_jump_context, q_branch
from fracflux.modes import build_mode_table

cfg = load_config((pathlib.Path(__file__).resolve().parents[1] / "configs" / "demo.cfg").read_text())
table = build_mode_table(cfg.model, cfg.K)
ctx = make_jump_context(cfg.model, table, cfg.phi, cfg.psi, cfg.source, "ip2")

print("rho, jump(rho), Q(1, rho), Q(5, rho):")
for rho in (0.5, 1.0, 2.0):
    print(f"  {rho:4.1f}  {jump(ctx, rho):.6e}  {q_branch(ctx, 1, rho):.6e}  {q_branch(ctx, 5, rho):.6e}")

alpha = 1.0 / np.sqrt(2.0)
print("\ndense-branch search at alpha = 1/sqrt(2):")
for y in np.linspace(0.0, 2 * np.pi, 5)[:-1]:
    n = branch_search(alpha, float(y), 0.01, 5000)
    print(f"  y = {y:.4f}: first n with |e^(2 pi i n/alpha) - e^(iy)| < 0.01 -> {n}")

for a in (0.5, 0.75, 2.0 / 3.0):
    print(f"orbit size of the branch factors at alpha = {a}: {branch_orbit_size(a)}")
