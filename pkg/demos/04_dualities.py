"""Non-invertible duality, the Kennedy-Tasaki map and the edge projective representation.

Run with ``python demos/04_dualities.py``.
"""

import numpy as np

from clusterlab import ChainSpec, build
from clusterlab.symmetry import (
    edge_representation,
    edge_symmetry_action,
    intertwine_check,
    kt_check,
    mapped_pair,
    noninvertible_D,
    projective_phase,
)

spec = ChainSpec(6)
d = noninvertible_D(spec)
h = build(spec).hamiltonian
print(f"[D, H] residual: {intertwine_check(d, h, h):.1e}")
print("D X_j = Z_{j-1} Z_{j+1} D, worst residual:",
      f"{max(intertwine_check(d, *mapped_pair(spec, j)) for j in range(1, 7)):.1e}")
sv = np.linalg.svd(d.dense(), compute_uv=False)
print(f"D kills {int(np.sum(sv < 1e-10))} of {len(sv)} directions, so it has no inverse")

print(f"Kennedy-Tasaki map, worst residual at 2L=4: {kt_check(ChainSpec(4)).max_residual:.1e}")

open_spec = ChainSpec(6, "open")
rep = edge_representation(open_spec)
for edge in ("left", "right"):
    w = projective_phase(rep[edge, "odd"], rep[edge, "even"])
    print(f"{edge} edge: U(odd) U(even) = {w:+d} U(even) U(odd)")
print("sign of eta L eta:")
for (eta, logical), sign in sorted(edge_symmetry_action(open_spec).items()):
    print(f"  eta_{eta:4s} on {logical:8s}: {sign:+d}")
