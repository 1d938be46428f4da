"""
Optimal reversal strength
=========================

For each pre-measurement strength the post-measurement strength has a
closed-form optimum.  Larger p buys more concurrence at a lower success
probability; the trade-off is steeper for the less excited state.
"""

import math

import numpy as np

from bandgap_trap import DEFAULT_SPECTRUM, derive_pseudomodes, dynamics
from bandgap_trap.optimize import grid_validate, optimal_vs_p
from bandgap_trap.protocol import assemble_x

params = derive_pseudomodes(DEFAULT_SPECTRUM)
amps = dynamics.protocol_amplitudes(dynamics.evolve(params, [0.0, 15.0]))[1]

ps = np.linspace(0, 0.9, 7)
for theta, name in ((math.pi / 3, "pi/3"), (math.pi / 4, "pi/4"), (math.pi / 6, "pi/6")):
    print(f"theta = {name}")
    for p, pt in zip(ps, optimal_vs_p(theta, ps, amps)):
        print(f"  p = {p:.2f}  p_r* = {pt.p_r_star:.4f}  C = {pt.C_opt:.4f}  P = {pt.P_opt:.4f}")

# the closed form against a brute-force scan of p_r
x = assemble_x(math.pi / 3, 0.5, amps)
g = grid_validate(x)
print(f"grid search at p = 0.5: p_r = {g.p_r_star:.4f}, C = {g.C_opt:.6f}")
