"""Dual homogeneous hypergraphs and their normalized propagation operators.

For domain ``U`` and edge type ``i`` every V node becomes one hyperedge over
the U nodes it touches through type-``i`` edges, so ``H[U, i]`` is exactly the
type-``i`` biadjacency matrix and ``H[V, i]`` its transpose. Hyperedge axes
always span the full counterpart node set; empty hyperedges are zero columns.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .linalg import check_csr, csr_from_triplets, spmm, transpose_spmm
from .netio import MultiplexBipartiteNetwork

__all__ = [
    "BASE",
    "Hypergraph",
    "PropagationOperator",
    "DualHypergraphs",
    "build_type_hypergraph",
    "build_base_hypergraph",
    "degrees",
    "propagation_operator",
    "build_dual_hypergraphs",
    "hypergraph_summary",
]

BASE = "base"
StreamKey = Union[str, int]  # "base" or an edge-type index
DOMAINS = ("U", "V")


@dataclass(frozen=True, eq=False)
class Hypergraph:
    domain: str
    type_index: StreamKey
    H: sp.csr_matrix
    node_deg: np.ndarray
    edge_deg: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.H.shape[0]

    @property
    def n_hyperedges(self) -> int:
        return self.H.shape[1]


class PropagationOperator:
    """Normalized operator kept in factored form ``theta = left @ right.T``.

    ``sym``:  left = right = D^-1/2 H B^-1/2
    ``asym``: left = D^-1 H B^-1,  right = H

    Applying the factors costs O(nnz(H) d) per product, whereas the
    materialized ``theta`` can approach |nodes|^2 entries; ``theta`` is built
    on first access.
    """

    def __init__(self, left: sp.csr_matrix, right: sp.csr_matrix, mode: str):
        self.left = left
        self.right = right
        self.mode = mode
        self._theta = None

    @property
    def theta(self) -> sp.csr_matrix:
        if self._theta is None:
            theta = sp.csr_matrix(self.left @ self.right.T)
            theta.sum_duplicates()
            theta.sort_indices()
            self._theta = theta
        return self._theta

    @property
    def shape(self) -> tuple[int, int]:
        return (self.left.shape[0], self.left.shape[0])

    def apply(self, X: np.ndarray) -> np.ndarray:
        """``theta @ X``."""
        return spmm(self.left, transpose_spmm(self.right, X))

    def apply_transpose(self, Y: np.ndarray) -> np.ndarray:
        """``theta.T @ Y``."""
        return spmm(self.right, transpose_spmm(self.left, Y))


def _check_domain(domain: str) -> None:
    if domain not in DOMAINS:
        raise ConfigError(f"domain must be 'U' or 'V', got {domain!r}")


def degrees(H: sp.spmatrix) -> tuple[np.ndarray, np.ndarray]:
    """Node degrees (row sums) and hyperedge degrees (column sums)."""
    H = sp.csr_matrix(H)
    return np.asarray(H.sum(axis=1)).ravel(), np.asarray(H.sum(axis=0)).ravel()


def _incidence(net: MultiplexBipartiteNetwork, domain: str, type_index: int) -> sp.csr_matrix:
    e = net.edges[type_index]
    ones = np.ones(len(e))
    if domain == "U":
        return csr_from_triplets(e[:, 0], e[:, 1], ones, (net.n_u, net.n_v))
    return csr_from_triplets(e[:, 1], e[:, 0], ones, (net.n_v, net.n_u))


def _hypergraph(domain: str, key: StreamKey, H: sp.csr_matrix) -> Hypergraph:
    H = check_csr(H)
    node_deg, edge_deg = degrees(H)
    return Hypergraph(domain, key, H, node_deg, edge_deg)


def build_type_hypergraph(net: MultiplexBipartiteNetwork, domain: str, type_index: int) -> Hypergraph:
    _check_domain(domain)
    if not 0 <= type_index < net.k:
        raise ConfigError(f"edge type index {type_index} out of range for k={net.k}")
    return _hypergraph(domain, type_index, _incidence(net, domain, type_index))


def build_base_hypergraph(net: MultiplexBipartiteNetwork, domain: str) -> Hypergraph:
    """Concatenate the ``k`` type incidence matrices along the hyperedge axis.

    Identical hyperedges coming from different types are all kept.
    """
    _check_domain(domain)
    H = sp.hstack([_incidence(net, domain, t) for t in range(net.k)], format="csr")
    return _hypergraph(domain, BASE, H)


def _safe_inv(x: np.ndarray, power: float = 1.0) -> np.ndarray:
    out = np.zeros_like(x, dtype=np.float64)
    pos = x > 0
    out[pos] = x[pos] ** -power
    return out


def propagation_operator(hg: Hypergraph, mode: str) -> PropagationOperator:
    """Normalized node-to-node operator with identity hyperedge weights.

    ``sym``:  D^-1/2 H B^-1 H^T D^-1/2
    ``asym``: D^-1 H B^-1 H^T

    Zero node or hyperedge degrees invert to zero.
    """
    H = hg.H
    if mode == "sym":
        left = sp.diags(_safe_inv(hg.node_deg, 0.5)) @ H @ sp.diags(_safe_inv(hg.edge_deg, 0.5))
        left = sp.csr_matrix(left)
        right = left
    elif mode == "asym":
        left = sp.csr_matrix(sp.diags(_safe_inv(hg.node_deg)) @ H @ sp.diags(_safe_inv(hg.edge_deg)))
        right = H
    else:
        raise ConfigError(f"mode must be 'sym' or 'asym', got {mode!r}")
    return PropagationOperator(left, right, mode)


class DualHypergraphs:
    """Both hypergraph sets of a network plus their precomputed operators.

    ``hypergraphs[(domain, key)]`` and ``operators[(domain, key)]`` are keyed
    by ``"U"``/``"V"`` and ``"base"`` or an edge-type index.
    """

    def __init__(self, net: MultiplexBipartiteNetwork, mode: str):
        self.mode = mode
        self.k = net.k
        self.n_nodes = {"U": net.n_u, "V": net.n_v}
        self.hypergraphs: dict[tuple[str, StreamKey], Hypergraph] = {}
        for dom in DOMAINS:
            self.hypergraphs[(dom, BASE)] = build_base_hypergraph(net, dom)
            for t in range(net.k):
                self.hypergraphs[(dom, t)] = build_type_hypergraph(net, dom, t)
        self.operators = {key: propagation_operator(hg, mode)
                          for key, hg in self.hypergraphs.items()}

    def operator(self, domain: str, key: StreamKey) -> PropagationOperator:
        return self.operators[(domain, key)]

    def theta(self, domain: str, key: StreamKey) -> sp.csr_matrix:
        return self.operators[(domain, key)].theta

    def incidence(self, domain: str, key: StreamKey) -> sp.csr_matrix:
        return self.hypergraphs[(domain, key)].H

    def stream_keys(self) -> list[StreamKey]:
        return [BASE, *range(self.k)]


def build_dual_hypergraphs(net: MultiplexBipartiteNetwork, mode: str = "asym") -> DualHypergraphs:
    return DualHypergraphs(net, mode)


def hypergraph_summary(net: MultiplexBipartiteNetwork) -> list[dict]:
    """Per-hypergraph size statistics.

    ``mean_edge_degree`` averages over non-empty hyperedges only.
    """
    rows = []
    for dom in DOMAINS:
        hgs = [build_base_hypergraph(net, dom)] + [build_type_hypergraph(net, dom, t) for t in range(net.k)]
        for hg in hgs:
            nonempty = hg.edge_deg[hg.edge_deg > 0]
            label = BASE if hg.type_index == BASE else net.edge_types[hg.type_index]
            rows.append({
                "domain": dom,
                "type": label,
                "nodes": hg.n_nodes,
                "hyperedges": hg.n_hyperedges,
                "nnz": int(hg.H.nnz),
                "mean_edge_degree": float(nonempty.mean()) if nonempty.size else 0.0,
            })
    return rows
