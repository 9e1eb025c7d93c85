"""
Where averaging beats alternating
=================================

Starting inside A or B, MAP always leads.  Starting from the eigenvector of
the average operator at 1/2 - cos/2 reverses the order once the Friedrichs
cosine exceeds 1/2: MSP then contracts by that small eigenvalue while MAP
is stuck at cos^2.
"""

import numpy as np

from projlab import msp_beats_map_start, subspaces_with_angles
from projlab.scenarios import counterexample_law_highprec, counterexample_report

angles = [float(np.arccos(0.8)), 1.2]
A, B = subspaces_with_angles(6, angles, seed=4)
w = msp_beats_map_start(A, B)
rep = counterexample_report(A, B, K=12, w=w)
print("verdict:", rep.verdict, "| predicted lambda, mu:", rep.predicted_lambda, rep.predicted_mu)
for k, m, s, lead in rep.table()[:6]:
    print(f"k={k:2d}  MAP {m:.3e}  MSP {s:.3e}  leader {lead}")

# MAP follows its law to rounding: map_k^2 = lambda^(2k-1) mu_-.
print("max relative deviation of the MAP law:", rep.residuals["map_law_rel"])

# The ratio map_k / msp_k is harder.  In doubles the start carries a
# 1e-16 trace of the mu_+ eigenvector, and MSP inflates it by mu_+/mu_- per
# step.  Replaying the same pair with mpmath hides the seed again.
hp = counterexample_law_highprec(6, angles, seed=4, K=30)
print(f"extended precision ({hp['dps']} digits): ratio-law deviation {hp['max_rel_deviation']:.1e}")

# Below 1/2 there is no such start.
A_low, B_low = subspaces_with_angles(6, [float(np.arccos(0.4))], seed=4)
try:
    msp_beats_map_start(A_low, B_low)
except Exception as exc:
    print("cos = 0.4:", type(exc).__name__, "-", exc)
