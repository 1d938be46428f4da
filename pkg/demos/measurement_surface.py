"""
Weak measurement and reversal at a fixed time
=============================================

Scan the pre-measurement strength p and the post-measurement strength p_r
at Omega t = 15 and look at where the concurrence improves on the bare
dynamics.  The same table comes out of ``bandgap-trap sweep --preset fig2a``.
"""

import numpy as np

from bandgap_trap.cli import run_scenario
from bandgap_trap.config import preset

table = run_scenario("sweep", preset("fig2a"))
p, p_r = table.column("p"), table.column("p_r")
C, P = table.column("C"), table.column("P")

bare = C[(p == 0) & (p_r == 0)][0]
print(f"no measurement: C = {bare:.4f}")

# best point on the grid and what it costs in success probability
k = np.argmax(C)
print(f"best grid point: p = {p[k]:.2f}, p_r = {p_r[k]:.2f}, C = {C[k]:.4f}, P = {P[k]:.3f}")

# fraction of the plane that beats the bare dynamics
print(f"enhanced on {np.mean(C > bare):.0%} of the (p, p_r) grid")

# a coarse view of C along the diagonal p = p_r
for i in range(0, 50, 7):
    on_diag = (p == p[i * 50]) & (np.isclose(p_r, p[i * 50]))
    print(f"  p = p_r = {p[i * 50]:.2f}: C = {C[on_diag][0]:.4f}, P = {P[on_diag][0]:.3f}")
