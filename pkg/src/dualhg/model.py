"""DualHGCN forward/backward over the dual hypergraph sets.

Streams are addressed by ``(domain, key)`` with ``domain`` in ``{"U", "V"}``
and ``key`` either ``"base"`` or an edge-type index. Layer ``l`` of a type
stream ``(D, i)`` computes

    S = Theta[D,i] X[D,i] P  (+ X[D,base] Q_intra)  (+ H[D',i]^T X[D',i] Q_inter)
    X' = relu(S)

where ``D'`` is the counterpart domain. Base streams use the convolution term
only. The head concatenates ``[X[D,base], X[D,0], ..., X[D,k-1]]`` and applies
an affine map with no activation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .hypergraph import BASE, DualHypergraphs
from .linalg import dropout, make_rng, relu, spmm, transpose_spmm

__all__ = ["ArchConfig", "Embeddings", "ActivationCache", "init_params",
           "forward", "backward", "param_shapes"]

OTHER = {"U": "V", "V": "U"}


@dataclass(frozen=True)
class ArchConfig:
    mode: str = "asym"
    num_layers: int = 2
    dim: int = 32
    intra: bool = True
    inter: bool = True
    dropout: float = 0.5
    k: int = 1
    share_intra_weights: bool = False

    def __post_init__(self):
        if self.mode not in ("sym", "asym"):
            raise ConfigError(f"mode must be 'sym' or 'asym', got {self.mode!r}")
        if self.num_layers < 1:
            raise ConfigError("num_layers must be >= 1")
        if self.dim < 1 or self.k < 1:
            raise ConfigError("dim and k must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")

    def layer_dims(self, in_dim: int) -> list[int]:
        return [in_dim] + [self.dim] * self.num_layers

    def stream_keys(self) -> list:
        return [BASE, *range(self.k)]


@dataclass
class Embeddings:
    Z_U: np.ndarray
    Z_V: np.ndarray

    def __getitem__(self, domain: str) -> np.ndarray:
        return self.Z_U if domain == "U" else self.Z_V


@dataclass
class ActivationCache:
    config: ArchConfig
    hypergraphs: DualHypergraphs
    shapes: dict
    layers: list = field(default_factory=list)
    head_inputs: dict = field(default_factory=dict)


def _intra_name(dom, key, layer, cfg):
    if cfg.share_intra_weights:
        return f"Qintra.{dom}.{layer}"
    return f"Qintra.{dom}.{key}.{layer}"


def param_shapes(config: ArchConfig, in_dim_u: int, in_dim_v: int) -> dict[str, tuple]:
    """Ordered mapping of parameter name to shape for a config."""
    dims = {"U": config.layer_dims(in_dim_u), "V": config.layer_dims(in_dim_v)}
    shapes: dict[str, tuple] = {}
    for layer in range(config.num_layers):
        for dom in ("U", "V"):
            d_in, d_out = dims[dom][layer], dims[dom][layer + 1]
            for key in config.stream_keys():
                shapes[f"P.{dom}.{key}.{layer}"] = (d_in, d_out)
                if key == BASE:
                    continue
                if config.intra:
                    shapes[_intra_name(dom, key, layer, config)] = (d_in, d_out)
                if config.inter:
                    shapes[f"Qinter.{dom}.{key}.{layer}"] = (dims[OTHER[dom]][layer], d_out)
    width = (config.k + 1) * config.dim
    for dom in ("U", "V"):
        shapes[f"W.{dom}"] = (width, config.dim)
        shapes[f"b.{dom}"] = (config.dim,)
    return shapes


def init_params(config: ArchConfig, in_dim_u: int, in_dim_v: int, seed: int) -> dict[str, np.ndarray]:
    """Glorot-uniform weights, zero biases."""
    rng = make_rng(seed)
    params = {}
    for name, shape in param_shapes(config, in_dim_u, in_dim_v).items():
        if len(shape) == 1:
            params[name] = np.zeros(shape)
        else:
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = rng.uniform(-bound, bound, size=shape)
    return params


def _check_params(params, shapes):
    for name, shape in shapes.items():
        if name not in params:
            raise ShapeError(f"missing parameter {name}")
        if params[name].shape != shape:
            raise ShapeError(f"parameter {name}: expected shape {shape}, got {params[name].shape}")
    extra = set(params) - set(shapes)
    if extra:
        raise ShapeError(f"unexpected parameters {sorted(extra)}")


def forward(params, X0_U, X0_V, hypergraphs: DualHypergraphs, config: ArchConfig,
            rng: np.random.Generator | None = None, training: bool = False):
    """Run the network; returns ``(Embeddings, ActivationCache)``."""
    X0 = {"U": np.asarray(X0_U, dtype=np.float64), "V": np.asarray(X0_V, dtype=np.float64)}
    for dom in ("U", "V"):
        if X0[dom].ndim != 2 or X0[dom].shape[0] != hypergraphs.n_nodes[dom]:
            raise ShapeError(f"X0_{dom}: expected {hypergraphs.n_nodes[dom]} rows, got shape {X0[dom].shape}")
    if hypergraphs.k != config.k:
        raise ShapeError(f"hypergraphs built for k={hypergraphs.k}, config has k={config.k}")
    shapes = param_shapes(config, X0["U"].shape[1], X0["V"].shape[1])
    _check_params(params, shapes)
    if training and config.dropout > 0 and rng is None:
        raise ConfigError("training with dropout needs an rng")

    keys = config.stream_keys()
    X = {(dom, key): X0[dom] for dom in ("U", "V") for key in keys}
    cache = ActivationCache(config=config, hypergraphs=hypergraphs, shapes=shapes)

    for layer in range(config.num_layers):
        dropped, masks = {}, {}
        for sk in X:
            dropped[sk], masks[sk] = dropout(X[sk], config.dropout, rng, training)
        prop, inter_in, active, new = {}, {}, {}, {}
        for dom in ("U", "V"):
            for key in keys:
                sk = (dom, key)
                tx = hypergraphs.operator(dom, key).apply(dropped[sk])
                S = tx @ params[f"P.{dom}.{key}.{layer}"]
                if key != BASE:
                    if config.intra:
                        S += dropped[(dom, BASE)] @ params[_intra_name(dom, key, layer, config)]
                    if config.inter:
                        other = OTHER[dom]
                        m = transpose_spmm(hypergraphs.incidence(other, key), dropped[(other, key)])
                        inter_in[sk] = m
                        S += m @ params[f"Qinter.{dom}.{key}.{layer}"]
                prop[sk] = tx
                active[sk] = S > 0
                new[sk] = relu(S)
        cache.layers.append({"dropped": dropped, "masks": masks, "prop": prop,
                             "inter_in": inter_in, "active": active})
        X = new

    Z = {}
    for dom in ("U", "V"):
        C = np.hstack([X[(dom, key)] for key in keys])
        cache.head_inputs[dom] = C
        Z[dom] = C @ params[f"W.{dom}"] + params[f"b.{dom}"]
    return Embeddings(Z["U"], Z["V"]), cache


def backward(params, cache: ActivationCache, dZ_U, dZ_V, config: ArchConfig) -> dict[str, np.ndarray]:
    """Exact reverse-mode gradients of a scalar w.r.t. every parameter,
    given its gradients ``dZ_U``/``dZ_V`` w.r.t. the embeddings."""
    if cache.config != config or len(cache.layers) != config.num_layers:
        raise ShapeError("activation cache does not match this config")
    _check_params(params, cache.shapes)
    hg = cache.hypergraphs
    keys = config.stream_keys()
    dZ = {"U": np.asarray(dZ_U, dtype=np.float64), "V": np.asarray(dZ_V, dtype=np.float64)}
    grads = {name: np.zeros_like(p) for name, p in params.items()}

    dX = {}
    for dom in ("U", "V"):
        C = cache.head_inputs[dom]
        if dZ[dom].shape != (C.shape[0], config.dim):
            raise ShapeError(f"dZ_{dom}: expected {(C.shape[0], config.dim)}, got {dZ[dom].shape}")
        grads[f"b.{dom}"] = dZ[dom].sum(axis=0)
        grads[f"W.{dom}"] = C.T @ dZ[dom]
        dC = dZ[dom] @ params[f"W.{dom}"].T
        for j, key in enumerate(keys):
            dX[(dom, key)] = dC[:, j * config.dim:(j + 1) * config.dim]

    for layer in reversed(range(config.num_layers)):
        c = cache.layers[layer]
        d_dropped = {sk: np.zeros_like(v) for sk, v in c["dropped"].items()}
        for dom in ("U", "V"):
            for key in keys:
                sk = (dom, key)
                dS = dX[sk] * c["active"][sk]
                pname = f"P.{dom}.{key}.{layer}"
                grads[pname] += c["prop"][sk].T @ dS
                d_dropped[sk] += hg.operator(dom, key).apply_transpose(dS @ params[pname].T)
                if key == BASE:
                    continue
                if config.intra:
                    qname = _intra_name(dom, key, layer, config)
                    grads[qname] += c["dropped"][(dom, BASE)].T @ dS
                    d_dropped[(dom, BASE)] += dS @ params[qname].T
                if config.inter:
                    other = OTHER[dom]
                    qname = f"Qinter.{dom}.{key}.{layer}"
                    grads[qname] += c["inter_in"][sk].T @ dS
                    d_dropped[(other, key)] += spmm(hg.incidence(other, key), dS @ params[qname].T)
        dX = {sk: d_dropped[sk] * c["masks"][sk] for sk in d_dropped}
    return grads
