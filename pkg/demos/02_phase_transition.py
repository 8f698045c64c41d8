"""Interpolating from the paramagnet to the cluster chain.

H(alpha) = (1 - alpha) H_X + alpha H_model. The CZ layer maps H(alpha) to H(1 - alpha),
so the spectrum is symmetric about alpha = 1/2, where the gap closes in the thermodynamic limit.
Run with ``python demos/02_phase_transition.py [sites]`` (default 10).
"""

import sys

import numpy as np

from clusterlab import ChainSpec, sweep_alpha
from clusterlab.symmetry import duality_residual

n = int(sys.argv[1]) if len(sys.argv) > 1 else 10
spec = ChainSpec(n)
print(f"duality residual at alpha = 0.3: {duality_residual(spec, 0.3):.2e}")

table = sweep_alpha(spec, np.linspace(0, 1, 21), m=2)
gap, so = table.column("gap"), table.column("string_order")
print(f"{'alpha':>6} {'gap':>8} {'string order':>13}")
for row, g, s in zip(table.rows, gap, so):
    bar = "#" * int(round(20 * s))
    print(f"{row.alpha:6.2f} {g:8.4f} {s:13.4f}  {bar}")
print(f"smallest gap at alpha = {table.rows[int(np.argmin(gap))].alpha:.2f}")
