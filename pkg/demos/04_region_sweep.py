"""
Sweeping the Friedrichs cosine
==============================

A grid over cos in {0.2, ..., 0.9} and three kinds of start.  Starts in A
always go to MAP.  The special mu_- start flips to MSP exactly above 1/2;
below it no such start exists and the cell falls back to an A-start.

The CSV printed at the end is the plot-ready form of the table.
"""

import numpy as np

from projlab.scenarios import sweep, sweep_csv, sweep_summary

spec = {
    "d": 8,
    "angle_sets": [[float(np.arccos(c)), 1.4] for c in (0.2, 0.4, 0.6, 0.9)],
    "starts": ["A", "mu_minus", "random"],
    "seeds": [0, 1],
    "K": 30,
}
reports = sweep(spec, jobs=4)

for region, kinds in sweep_summary(reports).items():
    for kind, counts in kinds.items():
        print(f"{region:10s} {kind:9s} {counts}")

print()
print(sweep_csv(reports))
