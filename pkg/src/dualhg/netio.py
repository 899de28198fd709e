"""Multiplex bipartite networks: data model, TSV parsing, splits, synthetic data."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataError
from .linalg import make_rng

logger = logging.getLogger(__name__)

__all__ = [
    "MultiplexBipartiteNetwork",
    "EdgeSplit",
    "parse_network",
    "read_network",
    "format_edges",
    "format_labels",
    "sparsity",
    "sparsity_from_counts",
    "split_edges",
    "subsample_edges",
    "restrict_to_type",
    "collapse_types",
    "generate_synthetic",
]


@dataclass(frozen=True, eq=False)
class MultiplexBipartiteNetwork:
    """Two node domains ``U``/``V`` joined by ``k`` typed edge sets.

    ``edges[i]`` is an ``(m_i, 2)`` int array of ``(u_index, v_index)`` rows.
    ``labels_v`` holds a class index per V node, ``-1`` when unlabeled.
    """

    u_ids: tuple[str, ...]
    v_ids: tuple[str, ...]
    edge_types: tuple[str, ...]
    edges: tuple[np.ndarray, ...]
    attrs_u: np.ndarray | None = None
    attrs_v: np.ndarray | None = None
    labels_v: np.ndarray | None = None
    class_names: tuple[str, ...] = ()
    dropped_duplicates: int = field(default=0, compare=False)

    def __post_init__(self):
        if len(self.edge_types) < 1:
            raise DataError("a network needs at least one edge type")
        if len(self.edges) != len(self.edge_types):
            raise DataError("one edge array is required per edge type")
        n_u, n_v = len(self.u_ids), len(self.v_ids)
        fixed = []
        for t, e in enumerate(self.edges):
            e = np.asarray(e, dtype=np.int64).reshape(-1, 2)
            if e.size and (e[:, 0].min() < 0 or e[:, 0].max() >= n_u
                           or e[:, 1].min() < 0 or e[:, 1].max() >= n_v):
                raise DataError(f"edge type {self.edge_types[t]!r}: node index out of range")
            keys = e[:, 0] * n_v + e[:, 1]
            if np.unique(keys).size != keys.size:
                raise DataError(f"edge type {self.edge_types[t]!r}: duplicate (u, v) pair")
            e.setflags(write=False)
            fixed.append(e)
        object.__setattr__(self, "edges", tuple(fixed))
        if self.attrs_u is not None and np.shape(self.attrs_u)[0] != n_u:
            raise DataError("attrs_u must have one row per U node")
        if self.attrs_v is not None and np.shape(self.attrs_v)[0] != n_v:
            raise DataError("attrs_v must have one row per V node")
        if self.labels_v is not None and len(self.labels_v) != n_v:
            raise DataError("labels_v must have one entry per V node")

    @property
    def n_u(self) -> int:
        return len(self.u_ids)

    @property
    def n_v(self) -> int:
        return len(self.v_ids)

    @property
    def k(self) -> int:
        return len(self.edge_types)

    @property
    def n_edges(self) -> int:
        return sum(len(e) for e in self.edges)

    def typed_edges(self) -> np.ndarray:
        """All edges as an ``(|E|, 3)`` array of ``(u, v, type)`` rows."""
        parts = [np.column_stack([e, np.full(len(e), t, dtype=np.int64)])
                 for t, e in enumerate(self.edges)]
        return np.concatenate(parts).reshape(-1, 3)

    def pair_keys(self) -> np.ndarray:
        """Sorted unique ``u * |V| + v`` keys of pairs linked by any type."""
        keys = [e[:, 0] * self.n_v + e[:, 1] for e in self.edges]
        return np.unique(np.concatenate(keys)) if keys else np.empty(0, np.int64)

    def biadjacency(self, type_index: int) -> np.ndarray:
        """Dense 0/1 ``|U| x |V|`` matrix of one edge type."""
        A = np.zeros((self.n_u, self.n_v))
        e = self.edges[type_index]
        A[e[:, 0], e[:, 1]] = 1.0
        return A

    def with_edges(self, edges) -> "MultiplexBipartiteNetwork":
        return replace(self, edges=tuple(edges), dropped_duplicates=0)


@dataclass(frozen=True, eq=False)
class EdgeSplit:
    train: MultiplexBipartiteNetwork
    test_edges: np.ndarray  # (m, 3): u, v, type


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield lineno, line.split("\t")


def _parse_attrs(text: str, index: dict[str, int], domain: str) -> np.ndarray:
    rows: dict[int, list[float]] = {}
    width = None
    for lineno, fields in _lines(text):
        if len(fields) < 2:
            raise DataError(f"{domain} attributes line {lineno}: expected id and at least one value")
        node = fields[0]
        if node not in index:
            raise DataError(f"{domain} attributes line {lineno}: unknown node id {node!r}")
        try:
            vals = [float(x) for x in fields[1:]]
        except ValueError:
            raise DataError(f"{domain} attributes line {lineno}: non-numeric value") from None
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise DataError(f"{domain} attributes line {lineno}: expected {width} values, got {len(vals)}")
        rows[index[node]] = vals
    if len(rows) != len(index):
        missing = [n for n, i in index.items() if i not in rows][:5]
        raise DataError(f"{domain} attributes missing for nodes {missing}")
    return np.array([rows[i] for i in range(len(index))], dtype=np.float64)


def parse_network(edge_text: str, attr_u_text: str | None = None,
                  attr_v_text: str | None = None,
                  labels_text: str | None = None) -> MultiplexBipartiteNetwork:
    """Parse TSV text into a network.

    Node and type indices follow first appearance in ``edge_text``. Repeated
    ``(u, v, type)`` lines are dropped and counted in ``dropped_duplicates``.
    """
    u_index: dict[str, int] = {}
    v_index: dict[str, int] = {}
    t_index: dict[str, int] = {}
    per_type: list[list[tuple[int, int]]] = []
    seen: set[tuple[int, int, int]] = set()
    dups = 0
    for lineno, fields in _lines(edge_text):
        if len(fields) != 3:
            raise DataError(f"edges line {lineno}: expected 3 tab-separated fields, got {len(fields)}")
        u, v, t = fields
        ui = u_index.setdefault(u, len(u_index))
        vi = v_index.setdefault(v, len(v_index))
        if t not in t_index:
            t_index[t] = len(t_index)
            per_type.append([])
        ti = t_index[t]
        if (ui, vi, ti) in seen:
            dups += 1
            continue
        seen.add((ui, vi, ti))
        per_type[ti].append((ui, vi))
    if not per_type:
        raise DataError("edge list is empty")
    if dups:
        logger.warning("dropped %d duplicate edge line(s)", dups)

    attrs_u = _parse_attrs(attr_u_text, u_index, "U") if attr_u_text else None
    attrs_v = _parse_attrs(attr_v_text, v_index, "V") if attr_v_text else None

    labels_v = None
    class_names: tuple[str, ...] = ()
    if labels_text:
        labels_v = np.full(len(v_index), -1, dtype=np.int64)
        classes: dict[str, int] = {}
        for lineno, fields in _lines(labels_text):
            if len(fields) != 2:
                raise DataError(f"labels line {lineno}: expected 2 fields, got {len(fields)}")
            node, label = fields
            if node not in v_index:
                raise DataError(f"labels line {lineno}: unknown V node id {node!r}")
            labels_v[v_index[node]] = classes.setdefault(label, len(classes))
        class_names = tuple(classes)

    return MultiplexBipartiteNetwork(
        u_ids=tuple(u_index), v_ids=tuple(v_index), edge_types=tuple(t_index),
        edges=tuple(np.array(p, dtype=np.int64).reshape(-1, 2) for p in per_type),
        attrs_u=attrs_u, attrs_v=attrs_v, labels_v=labels_v,
        class_names=class_names, dropped_duplicates=dups,
    )


def _read(path) -> str | None:
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc


def read_network(edges_path, attrs_u_path=None, attrs_v_path=None,
                 labels_path=None) -> MultiplexBipartiteNetwork:
    return parse_network(_read(edges_path), _read(attrs_u_path),
                         _read(attrs_v_path), _read(labels_path))


def format_edges(net: MultiplexBipartiteNetwork) -> str:
    """Canonical edge list, sorted by (type, u_index, v_index)."""
    out = []
    for t, label in enumerate(net.edge_types):
        e = net.edges[t]
        order = np.lexsort((e[:, 1], e[:, 0]))
        out.extend(f"{net.u_ids[u]}\t{net.v_ids[v]}\t{label}\n" for u, v in e[order])
    return "".join(out)


def format_labels(net: MultiplexBipartiteNetwork) -> str:
    if net.labels_v is None:
        return ""
    return "".join(f"{net.v_ids[j]}\t{net.class_names[c]}\n"
                   for j, c in enumerate(net.labels_v) if c >= 0)


def sparsity_from_counts(n_u: int, n_v: int, n_edges: int) -> float:
    if n_u <= 0 or n_v <= 0:
        raise DataError("sparsity needs non-empty node sets")
    return 1.0 - n_edges / (n_u * n_v)


def sparsity(net: MultiplexBipartiteNetwork) -> float:
    """``1 - |E| / (|U| |V|)`` with ``|E|`` counting typed edges."""
    return sparsity_from_counts(net.n_u, net.n_v, net.n_edges)


def _regroup(net: MultiplexBipartiteNetwork, typed: np.ndarray) -> list[np.ndarray]:
    typed = typed[np.lexsort((typed[:, 1], typed[:, 0], typed[:, 2]))]
    return [typed[typed[:, 2] == t][:, :2] for t in range(net.k)]


def split_edges(net: MultiplexBipartiteNetwork, train_fraction: float, seed: int) -> EdgeSplit:
    """Uniform random train/test partition over all typed edges."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}")
    typed = net.typed_edges()
    n_train = int(math.floor(train_fraction * len(typed) + 0.5))
    if n_train == 0:
        raise DataError("split leaves no training edges")
    perm = make_rng(seed).permutation(len(typed))
    train = net.with_edges(_regroup(net, typed[perm[:n_train]]))
    test = typed[np.sort(perm[n_train:])]
    return EdgeSplit(train=train, test_edges=test)


def subsample_edges(net: MultiplexBipartiteNetwork, keep_fraction: float,
                    seed: int) -> MultiplexBipartiteNetwork:
    """Keep ``ceil(keep_fraction * |E|)`` typed edges chosen uniformly."""
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    typed = net.typed_edges()
    n_keep = int(math.ceil(keep_fraction * len(typed) - 1e-9))
    keep = make_rng(seed).permutation(len(typed))[:n_keep]
    return net.with_edges(_regroup(net, typed[keep]))


def restrict_to_type(net: MultiplexBipartiteNetwork, type_index: int) -> MultiplexBipartiteNetwork:
    if not 0 <= type_index < net.k:
        raise ConfigError(f"edge type index {type_index} out of range for k={net.k}")
    return replace(net, edge_types=(net.edge_types[type_index],),
                   edges=(net.edges[type_index],), dropped_duplicates=0)


def collapse_types(net: MultiplexBipartiteNetwork, label: str = "base") -> MultiplexBipartiteNetwork:
    """Single-type network over the distinct ``(u, v)`` pairs of all types."""
    keys = net.pair_keys()
    pairs = np.column_stack([keys // net.n_v, keys % net.n_v]).astype(np.int64)
    return replace(net, edge_types=(label,), edges=(pairs,), dropped_duplicates=0)


def generate_synthetic(n_u: int, n_v: int, k: int, n_blocks: int,
                       intra_block_edge_prob: float, noise_prob: float, seed: int):
    """Planted co-cluster network.

    Nodes of both domains are split into ``n_blocks`` balanced blocks (random
    assignment). Every edge type independently links each within-block pair
    with probability ``intra_block_edge_prob`` and each cross-block pair with
    probability ``noise_prob``. V labels are the block ids.

    Returns ``(net, (blocks_u, blocks_v))``.
    """
    if not 1 <= n_blocks <= min(n_u, n_v):
        raise ConfigError("n_blocks must be in [1, min(n_u, n_v)]")
    for name, p in (("intra_block_edge_prob", intra_block_edge_prob), ("noise_prob", noise_prob)):
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"{name} must be in [0, 1], got {p}")
    if k < 1:
        raise ConfigError("k must be >= 1")
    rng = make_rng(seed)
    blocks_u = rng.permutation(np.arange(n_u) % n_blocks)
    blocks_v = rng.permutation(np.arange(n_v) % n_blocks)
    same = blocks_u[:, None] == blocks_v[None, :]
    prob = np.where(same, intra_block_edge_prob, noise_prob)
    edges = []
    for _ in range(k):
        hit = rng.random((n_u, n_v)) < prob
        edges.append(np.argwhere(hit).astype(np.int64))
    net = MultiplexBipartiteNetwork(
        u_ids=tuple(f"u{i}" for i in range(n_u)),
        v_ids=tuple(f"v{j}" for j in range(n_v)),
        edge_types=tuple(f"r{t}" for t in range(k)),
        edges=tuple(edges),
        labels_v=blocks_v.astype(np.int64),
        class_names=tuple(f"block{b}" for b in range(n_blocks)),
    )
    return net, (blocks_u, blocks_v)
