"""
From a multiplex bipartite network to dual hypergraphs
======================================================

Each U node becomes a hyperedge over the V nodes it touches (and vice
versa), once per edge type, plus a base hypergraph joining all types.
"""
import numpy as np

from dualhg import build_dual_hypergraphs, parse_network
from dualhg.hypergraph import hypergraph_summary

text = """\
alice\tbook\tclick
alice\tlamp\tclick
alice\tmug\tclick
bob\tbook\tbuy
bob\tlamp\tclick
carol\tmug\tbuy
"""
net = parse_network(text)
dual = build_dual_hypergraphs(net, mode="asym")

# the V-side click hypergraph: one column per U node
H = dual.incidence("V", net.edge_types.index("click")).toarray()
print("V nodes:", net.v_ids)
print("hyperedges (U nodes):", net.u_ids)
print(H.astype(int))

# asym propagation averages over hyperedges, so its rows sum to one
theta = dual.theta("V", "base").toarray()
print(np.round(theta, 3))
print("row sums:", theta.sum(axis=1))

# the same statistics the dump-hg subcommand prints
for row in hypergraph_summary(net):
    print(row)
