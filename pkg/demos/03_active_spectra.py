"""
Active spectra and where the correspondence stops
=================================================

Every eigenvalue lambda of the product operator comes with two eigenvalues
1/2 +- sqrt(lambda)/2 of the average.  For a single start vector the same
pairing holds among the eigenvalues it actually excites, but only when the
start lies in A or in B.
"""

import numpy as np

from projlab import Subspace, active_correspondence, eigenvalue_correspondence
from projlab.scenarios import example_lambdax_case

A = Subspace(np.array([[1.0], [0.0]]))
B = Subspace(np.array([[0.6], [0.8]]))

for row in eigenvalue_correspondence(A, B).pairs:
    print(f"lambda={row['lambda']:.4f} <-> mu={row['mu_plus']:.4f}, {row['mu_minus']:.4f}")
print("start e1 in A:", active_correspondence(np.array([1.0, 0.0]), A, B).ok)

ex = example_lambdax_case(A, B, 0.36)
print("\nx = P_(B-perp) e1 =", ex["x"], "| in A or B?", ex["in_union"])
for name, act in ex["active"].items():
    print(f"  active set for {name:9s}:", sorted(round(v, 12) + 0.0 for v in act.values))
print("x = 0.4 w_+ + 1.6 w_-, residual", ex["split_residual"])
