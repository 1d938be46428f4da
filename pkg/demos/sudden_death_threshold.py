"""
How strong must the pre-measurement be?
=======================================

Below a threshold strength the concurrence of a weakly excited state
still reaches zero at some time in [0, 30]; above it the state stays
entangled.  The reversal alone cannot change this, since it only rescales
the concurrence by a positive factor.
"""

import math

import numpy as np

from bandgap_trap import DEFAULT_SPECTRUM, derive_pseudomodes
from bandgap_trap.optimize import TimeSampler, esd_threshold, first_zero_time

params = derive_pseudomodes(DEFAULT_SPECTRUM)
sampler = TimeSampler(params)

p_star = esd_threshold(math.pi / 20, params, sampler=sampler)
print(f"theta = pi/20: concurrence survives for p > {p_star:.3f}")

for p in np.round(np.linspace(0, 0.5, 6), 2):
    t0 = first_zero_time(math.pi / 20, p, params, sampler=sampler)
    print(f"  p = {p:.1f}: " + ("no sudden death" if t0 is None else f"first zero at Omega t = {t0:.2f}"))

# optimal reversal moves nothing
t_opt = first_zero_time(math.pi / 20, 0.0, params, "optimal", sampler=sampler)
print(f"with optimal p_r and p = 0 the first zero is still at {t_opt:.2f}")

# the raw no-jump amplitudes (not renormalised) give a different threshold
raw = esd_threshold(math.pi / 20, params, normalization="raw")
print(f"threshold with unnormalised amplitudes: {raw:.3f}")
