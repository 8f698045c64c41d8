"""The ZXZ cluster chain: stabilizers, spectrum, edge modes and string order.

Run with ``python demos/01_cluster_chain.py``.
"""

from clusterlab import ChainSpec, build, diagonalize_dense
from clusterlab.symmetry import edge_logicals, string_order

# A ring of six qubits. Each stabilizer is the image of X_j under the CZ layer.
ring = build(ChainSpec(6))
print("closed ZXZ stabilizers:")
for j, k in zip(ring.sites, ring.stabilizers):
    print(f"  K_{j} = {' '.join(k.labelled())}")

# Commuting stabilizers square to one, so the spectrum is -6 + 2k with binomial weights.
res = diagonalize_dense(ring.hamiltonian)
print("closed spectrum (energy, multiplicity):", [(round(e, 6) + 0.0, m) for e, m in res.degeneracy_clusters])

# Opening the chain and dropping the edge terms leaves a free qubit at each end.
chain_spec = ChainSpec(6, "open")
chain = build(chain_spec)
res = diagonalize_dense(chain.hamiltonian, k=8)
print(f"open chain: ground energy {res.ground_energy:+.3f}, degeneracy {res.degeneracy_clusters[0][1]}, gap {res.gap:.3f}")
for edge, _, letter, op in edge_logicals(chain_spec).all():
    print(f"  {edge:5s} logical {letter}: {' '.join(op.labelled())}")

# The string order sees the hidden Z2 x Z2 order of the cluster state, not the product state.
print("string order on the cluster state:", round(string_order(ring.reference_state, ring.spec, 2, 4), 10))
