"""Unsupervised training: negative sampling, log-sigmoid objective, Adam, and
tied-autoencoder input features."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, NumericError, ShapeError
from .hypergraph import build_base_hypergraph, build_dual_hypergraphs
from .linalg import derive_seed, make_rng, sigmoid
from .model import ArchConfig, Embeddings, backward, forward, init_params
from .netio import MultiplexBipartiteNetwork

logger = logging.getLogger(__name__)

__all__ = [
    "TrainConfig",
    "NegativeBatch",
    "AdamState",
    "TrainResult",
    "TiedAutoencoder",
    "sample_negatives",
    "objective_and_grad",
    "adam_step",
    "train",
    "autoencoder_features",
    "initial_features",
]

LOG_FLOOR = 1e-12
CLAMP_LOG = False
NEG_MODES = ("cross_domain", "same_domain")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.002
    epochs: int = 3000
    weight_decay: float = 5e-4
    lam: float = 0.5
    neg_samples: int = 1
    neg_mode: str = "cross_domain"
    seed: int = 0
    log_path: str | None = None

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError("lr must be > 0")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if self.weight_decay < 0:
            raise ConfigError("weight_decay must be >= 0")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lambda must be in [0, 1], got {self.lam}")
        if self.neg_samples < 1:
            raise ConfigError("neg_samples must be >= 1")
        if self.neg_mode not in NEG_MODES:
            raise ConfigError(f"neg_mode must be one of {NEG_MODES}")


@dataclass
class NegativeBatch:
    """Sampled partners for each positive edge.

    ``for_u[j]`` are partners scored against ``z_u`` of edge ``j`` and
    ``for_v[j]`` against ``z_v``. In ``cross_domain`` mode ``for_u`` indexes V
    and ``for_v`` indexes U; in ``same_domain`` mode the reverse. ``-1`` marks
    a slot that could not be filled.
    """

    for_u: np.ndarray
    for_v: np.ndarray
    mode: str
    skipped: int = 0

    def partner_domains(self) -> tuple[str, str]:
        return ("V", "U") if self.mode == "cross_domain" else ("U", "V")


def _fill(anchor, n, pool_size, invalid, candidates_for, rng):
    """Rejection-sample ``n`` partners per anchor, then enumerate leftovers."""
    out = rng.integers(0, pool_size, size=(len(anchor), n))
    bad = invalid(np.repeat(anchor, n).reshape(-1, n), out)
    for _ in range(100):
        if not bad.any():
            break
        rows, cols = np.nonzero(bad)
        out[rows, cols] = rng.integers(0, pool_size, size=rows.size)
        bad[rows, cols] = invalid(anchor[rows], out[rows, cols])
    skipped = 0
    if bad.any():
        for r, c in zip(*np.nonzero(bad)):
            cand = candidates_for(anchor[r])
            if cand.size:
                out[r, c] = cand[rng.integers(cand.size)]
            else:
                out[r, c] = -1
                skipped += 1
    return out, skipped


def sample_negatives(net: MultiplexBipartiteNetwork, edges, n: int,
                     rng: np.random.Generator, neg_mode: str = "cross_domain") -> NegativeBatch:
    """Draw ``n`` negatives for each endpoint of every ``(u, v)`` row in ``edges``.

    ``cross_domain``: partners ``v'`` with ``(u, v')`` unlinked under every
    type, and ``u'`` with ``(u', v)`` unlinked. ``same_domain``: ``u' != u``
    from U and ``v' != v`` from V.
    """
    if n < 1:
        raise ConfigError("n must be >= 1")
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    u, v = edges[:, 0], edges[:, 1]
    n_u, n_v = net.n_u, net.n_v

    if neg_mode == "cross_domain":
        keys = net.pair_keys()

        def linked(a, b):
            k = np.asarray(a) * n_v + np.asarray(b)
            pos = np.searchsorted(keys, k)
            pos = np.minimum(pos, max(keys.size - 1, 0))
            return keys[pos] == k if keys.size else np.zeros(np.shape(k), bool)

        def free_v(ui):
            return np.setdiff1d(np.arange(n_v), keys[(keys // n_v) == ui] % n_v)

        def free_u(vi):
            return np.setdiff1d(np.arange(n_u), keys[(keys % n_v) == vi] // n_v)

        for_u, s1 = _fill(u, n, n_v, lambda a, b: linked(a, b), free_v, rng)
        for_v, s2 = _fill(v, n, n_u, lambda a, b: linked(b, a), free_u, rng)
    elif neg_mode == "same_domain":
        def others(size):
            return lambda x: np.setdiff1d(np.arange(size), [x])

        for_u, s1 = _fill(u, n, n_u, lambda a, b: a == b, others(n_u), rng)
        for_v, s2 = _fill(v, n, n_v, lambda a, b: a == b, others(n_v), rng)
    else:
        raise ConfigError(f"neg_mode must be one of {NEG_MODES}, got {neg_mode!r}")
    if s1 + s2:
        logger.debug("skipped %d negative slots (node linked to whole domain)", s1 + s2)
    return NegativeBatch(for_u=for_u, for_v=for_v, mode=neg_mode, skipped=s1 + s2)


def _scatter_rows(target: np.ndarray, idx: np.ndarray, rows: np.ndarray) -> None:
    """``target[idx[j]] += rows[j]`` with repeated indices accumulated."""
    if idx.size == 0:
        return
    S = sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))),
                      shape=(target.shape[0], idx.size))
    target += S @ rows


def _log_sigmoid(x: np.ndarray, clamp: bool):
    """``log(sigmoid(x))`` and its derivative ``1 - sigmoid(x)``."""
    if clamp:
        p = sigmoid(x)
        ok = p > LOG_FLOOR
        return np.log(np.maximum(p, LOG_FLOOR)), np.where(ok, 1.0 - p, 0.0)
    return -np.logaddexp(0.0, -x), sigmoid(-x)


def objective_and_grad(Z: Embeddings, positives, negatives: NegativeBatch, lam: float,
                       clamp: bool = CLAMP_LOG):
    """Value of the objective (to be maximized) and its gradient w.r.t. Z.

    L = sum_(u,v) [ lam log s(z_u.z_v)
                    + (1-lam) sum_i ( log(1 - s(z_u.z_a_i)) + log(1 - s(z_v.z_b_i)) ) ]

    with ``s`` the logistic sigmoid. ``log s(x)`` is evaluated as
    ``-softplus(-x)``, which is finite for any ``x``; ``clamp=True`` instead
    floors the log argument at 1e-12 (zero gradient past the floor).
    """
    pos = np.asarray(positives, dtype=np.int64).reshape(-1, 2)
    ZU, ZV = Z.Z_U, Z.Z_V
    dZ = {"U": np.zeros_like(ZU), "V": np.zeros_like(ZV)}
    table = {"U": ZU, "V": ZV}
    zu, zv = ZU[pos[:, 0]], ZV[pos[:, 1]]

    score = np.sum(zu * zv, axis=1)
    logp, dlogp = _log_sigmoid(score, clamp)
    L = lam * float(np.sum(logp))
    g = lam * dlogp
    dzu = g[:, None] * zv
    dzv = g[:, None] * zu

    dom_a, dom_b = negatives.partner_domains()
    for anchor, d_anchor, idx, dom in ((zu, dzu, negatives.for_u, dom_a),
                                       (zv, dzv, negatives.for_v, dom_b)):
        valid = idx >= 0
        partners = table[dom][np.where(valid, idx, 0)]
        t = np.sum(anchor[:, None, :] * partners, axis=2)
        # log(1 - s(t)) = log s(-t)
        logq, dlogq = _log_sigmoid(-t, clamp)
        L += (1.0 - lam) * float(np.sum(logq[valid]))
        gt = -(1.0 - lam) * np.where(valid, dlogq, 0.0)
        d_anchor += np.sum(gt[..., None] * partners, axis=1)
        contrib = gt[..., None] * anchor[:, None, :]
        _scatter_rows(dZ[dom], idx[valid], contrib[valid])

    _scatter_rows(dZ["U"], pos[:, 0], dzu)
    _scatter_rows(dZ["V"], pos[:, 1], dzv)
    return L, dZ["U"], dZ["V"]


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_step(state: AdamState, params: dict, grads: dict, lr: float,
              weight_decay: float = 0.0) -> dict:
    """One Adam update (in place) descending ``grads``.

    Weight decay is an L2 term added to the gradient before the moments.
    """
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeError(f"gradient for {name} has shape {g.shape}, parameter {theta.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for parameter {name}")
        if weight_decay:
            g = g + weight_decay * theta
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(theta)
            state.v[name] = np.zeros_like(theta)
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        theta -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params


@dataclass
class TrainResult:
    embeddings: Embeddings
    params: dict
    history: list  # (epoch, objective)
    skipped_negatives: int = 0


def train(net: MultiplexBipartiteNetwork, arch: ArchConfig, tcfg: TrainConfig,
          X0_U, X0_V) -> TrainResult:
    """Full-batch training loop; negatives are resampled every epoch."""
    if arch.k != net.k:
        raise ConfigError(f"arch.k={arch.k} does not match network k={net.k}")
    hg = build_dual_hypergraphs(net, arch.mode)
    params = init_params(arch, np.shape(X0_U)[1], np.shape(X0_V)[1], derive_seed(tcfg.seed, 0))
    rng = make_rng(derive_seed(tcfg.seed, 1))
    positives = net.typed_edges()[:, :2]
    state = AdamState()
    history = []
    skipped = 0

    if len(positives) == 0 and tcfg.epochs > 0:
        logger.warning("no training edges; returning untrained embeddings")
    for epoch in range(1, tcfg.epochs + 1 if len(positives) else 1):
        negs = sample_negatives(net, positives, tcfg.neg_samples, rng, tcfg.neg_mode)
        skipped += negs.skipped
        Z, cache = forward(params, X0_U, X0_V, hg, arch, rng, training=True)
        L, dZU, dZV = objective_and_grad(Z, positives, negs, tcfg.lam)
        if not np.isfinite(L):
            raise NumericError(f"objective became non-finite at epoch {epoch}")
        grads = backward(params, cache, dZU, dZV, arch)
        # ascend L == descend -L
        adam_step(state, params, {k: -g for k, g in grads.items()}, tcfg.lr, tcfg.weight_decay)
        history.append((epoch, L))
        if epoch % 100 == 0:
            logger.info("epoch %d objective %.6f", epoch, L)

    Z, _ = forward(params, X0_U, X0_V, hg, arch, training=False)
    if tcfg.log_path:
        with open(tcfg.log_path, "w", encoding="utf-8") as fh:
            fh.write("epoch\tobjective\n")
            fh.writelines(f"{e}\t{obj:.10g}\n" for e, obj in history)
    return TrainResult(embeddings=Z, params=params, history=history, skipped_negatives=skipped)


class TiedAutoencoder:
    """One hidden layer, decoder weights tied to the encoder transpose.

    h = sigmoid(A W + b1),  A_hat = sigmoid(h W^T + b2),  loss = mean((A_hat - A)^2)
    """

    def __init__(self, n_inputs: int, width: int = 32, seed: int = 0):
        rng = make_rng(seed)
        bound = np.sqrt(6.0 / (n_inputs + width))
        self.params = {
            "W": rng.uniform(-bound, bound, size=(n_inputs, width)),
            "b1": np.zeros(width),
            "b2": np.zeros(n_inputs),
        }
        self.loss_history_: list[float] = []

    def encode(self, A) -> np.ndarray:
        return sigmoid(np.asarray(A @ self.params["W"]) + self.params["b1"])

    def _loss_grad(self, A):
        W = self.params["W"]
        h = self.encode(A)
        A_hat = sigmoid(h @ W.T + self.params["b2"])
        diff = A_hat - (A.toarray() if sp.issparse(A) else A)
        loss = float(np.mean(diff ** 2))
        dO = (2.0 / diff.size) * diff * A_hat * (1.0 - A_hat)
        dH = (dO @ W) * h * (1.0 - h)
        grads = {"W": dO.T @ h + np.asarray(A.T @ dH), "b1": dH.sum(axis=0), "b2": dO.sum(axis=0)}
        return loss, grads

    def fit(self, A, epochs: int = 500, lr: float = 0.01) -> "TiedAutoencoder":
        A = _as_matrix(A)
        state = AdamState()
        for _ in range(epochs):
            loss, grads = self._loss_grad(A)
            self.loss_history_.append(loss)
            adam_step(state, self.params, grads, lr)
        self.loss_history_.append(self._loss_grad(A)[0])
        return self

    def reconstruction_error(self, A: np.ndarray) -> float:
        return self._loss_grad(_as_matrix(A))[0]


def _as_matrix(A):
    return sp.csr_matrix(A, dtype=np.float64) if sp.issparse(A) else np.asarray(A, dtype=np.float64)


def autoencoder_features(adjacency, d: int = 32, epochs: int = 500, lr: float = 0.01,
                         seed: int = 0) -> np.ndarray:
    """Hidden codes of a tied autoencoder trained on adjacency rows (dense or sparse)."""
    A = _as_matrix(adjacency)
    if A.ndim != 2 or A.shape[0] < 1:
        raise ShapeError("adjacency must be a non-empty 2-D matrix")
    ae = TiedAutoencoder(A.shape[1], d, seed).fit(A, epochs, lr)
    return ae.encode(A)


def _standardize(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return (X - X.mean(axis=0)) / scale


def initial_features(net: MultiplexBipartiteNetwork, d: int = 32, epochs: int = 500,
                     lr: float = 0.01, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-domain input features.

    Attribute matrices are z-scored column-wise. A domain without attributes
    gets autoencoder codes of its base-hypergraph incidence rows (the
    concatenated per-type biadjacency rows).
    """
    out = []
    for i, (dom, attrs) in enumerate((("U", net.attrs_u), ("V", net.attrs_v))):
        if attrs is not None:
            out.append(_standardize(attrs))
        else:
            A = build_base_hypergraph(net, dom).H
            out.append(autoencoder_features(A, d, epochs, lr, derive_seed(seed, 7, i)))
    return out[0], out[1]
