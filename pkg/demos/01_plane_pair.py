"""
Two lines in the plane
======================

The smallest interesting pair: A is the x-axis and B is the line through
(0.6, 0.8).  Everything about the two iterations can be read off by hand
here, so this is the place to get a feel for the numbers.
"""

import numpy as np

from projlab import Subspace, eig_sym, pair_operators, principal_angles
from projlab.dynamics import error_sequence, operator_error_norms

A = Subspace(np.array([[1.0], [0.0]]))
B = Subspace(np.array([[0.6], [0.8]]))

prof = principal_angles(A, B)
print("cosines of the principal angles:", prof.cosines)
print("Friedrichs cosine:", prof.friedrichs_cos)

# The product P_B P_A P_B sees cos^2 = 0.36; the average (P_A + P_B)/2
# splits it into 1/2 +- 0.6/2.
ops = pair_operators(A, B)
print("spectrum of P_B P_A P_B:", sorted(eig_sym(ops.S).values))
print("spectrum of (P_A+P_B)/2:", sorted(eig_sym(ops.T).values))

# Worst-case contraction after k steps.
map_norms, msp_norms = operator_error_norms(A, B, 4)
for k, (m, s) in enumerate(zip(map_norms, msp_norms), start=1):
    print(f"k={k}: ||(P_A P_B)^k - P||={m:.6f} (0.6^{2*k-1}={0.6**(2*k-1):.6f}), "
          f"||T^k - P||={s:.6f} (0.8^{k}={0.8**k:.6f})")

# Start on A.  MAP shrinks by exactly 0.36 per step; MSP is a two-term
# sum dominated by 0.8, so it loses from the first step on.
x0 = np.array([1.0, 0.0])
m = error_sequence("MAP", x0, A, B, 8)
s = error_sequence("MSP", x0, A, B, 8)
print("\n k   MAP error      MSP error")
for k in range(9):
    print(f"{k:2d}  {m[k]:.6e}  {s[k]:.6e}")
