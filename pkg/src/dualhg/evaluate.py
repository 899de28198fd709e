"""Downstream evaluation: link prediction and node classification protocols."""
from __future__ import annotations

import json
import logging
from fractions import Fraction
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError, DataError, ShapeError
from .linalg import derive_seed, make_rng, sigmoid
from .model import ArchConfig, Embeddings
from .netio import MultiplexBipartiteNetwork, split_edges
from .train import TrainConfig, initial_features, train

logger = logging.getLogger(__name__)

__all__ = [
    "LinkDataset",
    "MetricSummary",
    "EvalReport",
    "LinkProtocol",
    "edge_feature",
    "sample_nonedges",
    "LogisticModel",
    "fit_logreg",
    "predict_proba",
    "SoftmaxModel",
    "fit_softmax_sgd",
    "predict",
    "auroc",
    "auprc",
    "f1_scores",
    "kfold",
    "build_link_dataset",
    "cross_validate_links",
    "LinkRun",
    "link_prediction_runs",
    "score_link_runs",
    "eval_link_prediction",
    "eval_node_classification",
]

COMBINERS = ("concat", "hadamard")


@dataclass
class LinkDataset:
    features: np.ndarray
    labels: np.ndarray
    provenance: np.ndarray  # (m, 3): u, v, type (-1 for sampled non-edges)


@dataclass
class MetricSummary:
    mean: float
    std: float
    values: list[float]

    @classmethod
    def from_values(cls, values) -> "MetricSummary":
        vals = [float(x) for x in values]
        std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
        return cls(mean=float(np.mean(vals)), std=std, values=vals)


@dataclass
class EvalReport:
    metrics: dict[str, MetricSummary]
    protocol: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {name: {"mean": m.mean, "std": m.std, "values": m.values}
               for name, m in self.metrics.items()}
        out["protocol"] = self.protocol
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        lines = [f"{'metric':<10} {'mean':>8} {'std':>8} {'n':>4}"]
        for name, m in self.metrics.items():
            lines.append(f"{name:<10} {m.mean:8.4f} {m.std:8.4f} {len(m.values):4d}")
        return "\n".join(lines)


def edge_feature(z_u, z_v, combiner: str = "concat") -> np.ndarray:
    """Edge representation from endpoint embeddings (rows or single vectors)."""
    z_u = np.asarray(z_u, dtype=np.float64)
    z_v = np.asarray(z_v, dtype=np.float64)
    if combiner == "concat":
        return np.concatenate([z_u, z_v], axis=-1)
    if combiner == "hadamard":
        if z_u.shape[-1] != z_v.shape[-1]:
            raise ShapeError(f"hadamard needs equal widths, got {z_u.shape[-1]} and {z_v.shape[-1]}")
        return z_u * z_v
    raise ConfigError(f"combiner must be one of {COMBINERS}, got {combiner!r}")


def sample_nonedges(net: MultiplexBipartiteNetwork, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` distinct uniform ``(u, v)`` pairs linked under no edge type."""
    total = net.n_u * net.n_v
    linked = net.pair_keys()
    available = total - linked.size
    if m > available:
        raise DataError(f"cannot sample {m} non-edges; only {available} exist")
    if m == 0:
        return np.empty((0, 2), dtype=np.int64)
    if m > available // 2:
        free = np.setdiff1d(np.arange(total, dtype=np.int64), linked, assume_unique=True)
        keys = rng.choice(free, size=m, replace=False)
    else:
        chosen: list[int] = []
        taken = set(linked.tolist())
        while len(chosen) < m:
            for key in rng.integers(0, total, size=2 * (m - len(chosen))).tolist():
                if key not in taken:
                    taken.add(key)
                    chosen.append(key)
                    if len(chosen) == m:
                        break
        keys = np.array(chosen, dtype=np.int64)
    return np.column_stack([keys // net.n_v, keys % net.n_v])


def _standardizer(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


@dataclass
class LogisticModel:
    w: np.ndarray
    b: float
    mean: np.ndarray
    scale: np.ndarray


def fit_logreg(X, y, lr: float = 0.5, epochs: int = 1000, l2: float = 1e-4) -> LogisticModel:
    """Binary logistic regression by full-batch gradient descent.

    Features are standardized internally; ``l2`` penalizes the weights only.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not np.isin(y, (0.0, 1.0)).all():
        raise DataError("logistic regression labels must be 0 or 1")
    mean, scale = _standardizer(X)
    Xs = (X - mean) / scale
    n = len(y)
    w = np.zeros(X.shape[1])
    b = 0.0
    for _ in range(epochs):
        err = sigmoid(Xs @ w + b) - y
        w -= lr * (Xs.T @ err / n + l2 * w)
        b -= lr * err.mean()
    return LogisticModel(w=w, b=b, mean=mean, scale=scale)


def predict_proba(model: LogisticModel, X) -> np.ndarray:
    Xs = (np.asarray(X, dtype=np.float64) - model.mean) / model.scale
    return sigmoid(Xs @ model.w + model.b)


@dataclass
class SoftmaxModel:
    W: np.ndarray
    b: np.ndarray
    mean: np.ndarray
    scale: np.ndarray


def fit_softmax_sgd(X, y, n_classes: int, lr: float = 0.05, epochs: int = 100,
                    rng: np.random.Generator | None = None, l2: float = 1e-4) -> SoftmaxModel:
    """Linear softmax classifier trained by per-example SGD over shuffled epochs."""
    if n_classes < 2:
        raise DataError("softmax classifier needs at least 2 classes")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    rng = rng if rng is not None else make_rng(0)
    mean, scale = _standardizer(X)
    Xs = (X - mean) / scale
    W = np.zeros((X.shape[1], n_classes))
    b = np.zeros(n_classes)
    for _ in range(epochs):
        for i in rng.permutation(len(y)):
            x = Xs[i]
            logits = x @ W + b
            p = np.exp(logits - logits.max())
            p /= p.sum()
            p[y[i]] -= 1.0
            W -= lr * (np.outer(x, p) + l2 * W)
            b -= lr * p
    return SoftmaxModel(W=W, b=b, mean=mean, scale=scale)


def predict(model: SoftmaxModel, X) -> np.ndarray:
    Xs = (np.asarray(X, dtype=np.float64) - model.mean) / model.scale
    # argmax returns the first maximum: ties go to the lowest class index
    return np.argmax(Xs @ model.W + model.b, axis=1)


def auroc(labels, scores) -> float:
    """Mann-Whitney estimate of P(positive outranks negative); ties count 1/2."""
    labels = np.asarray(labels).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUROC needs both positive and negative labels")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def auprc(labels, scores) -> float:
    """Step-wise average precision over descending unique score thresholds.

    The sum of ``delta_recall * precision`` is accumulated as an exact
    fraction, so the result is the correctly rounded value (e.g. exactly 5/6).
    """
    labels = np.asarray(labels).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(labels.sum())
    if n_pos == 0:
        raise DataError("AUPRC needs at least one positive label")
    order = np.argsort(-scores, kind="mergesort")
    s, lab = scores[order], labels[order]
    last = np.r_[np.nonzero(np.diff(s))[0], s.size - 1]  # last index of each threshold group
    tp = np.cumsum(lab)[last]
    picked = last + 1
    gained = np.diff(np.r_[0, tp])
    total = Fraction(0)
    for d, t, k in zip(gained.tolist(), tp.tolist(), picked.tolist()):
        if d:
            total += Fraction(d * t, k)
    return float(total / n_pos)


def f1_scores(y_true, y_pred, n_classes: int) -> tuple[float, float]:
    """Micro- and macro-averaged F1; a class with no support or predictions scores 0."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    tp = np.bincount(y_true[y_true == y_pred], minlength=n_classes)[:n_classes].astype(float)
    pred_count = np.bincount(y_pred, minlength=n_classes)[:n_classes]
    true_count = np.bincount(y_true, minlength=n_classes)[:n_classes]
    fp = pred_count - tp
    fn = true_count - tp
    denom = 2 * tp + fp + fn
    per_class = np.divide(2 * tp, denom, out=np.zeros(n_classes), where=denom > 0)
    micro_denom = 2 * tp.sum() + fp.sum() + fn.sum()
    micro = 2 * tp.sum() / micro_denom if micro_denom else 0.0
    return float(micro), float(per_class.mean())


def kfold(n: int, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffle ``range(n)`` into ``k`` disjoint folds of near-equal size."""
    if not 1 <= k <= n:
        raise ConfigError(f"need 1 <= folds <= n, got folds={k}, n={n}")
    return [np.sort(f) for f in np.array_split(rng.permutation(n), k)]


def _fold_pairs(folds):
    for i, test in enumerate(folds):
        if len(folds) == 1:
            yield i, test, test
        else:
            yield i, np.concatenate([f for j, f in enumerate(folds) if j != i]), test


def build_link_dataset(Z_U, Z_V, test_edges, nonedges, combiner: str = "concat") -> LinkDataset:
    test_edges = np.asarray(test_edges, dtype=np.int64).reshape(-1, 3)
    nonedges = np.asarray(nonedges, dtype=np.int64).reshape(-1, 2)
    u = np.r_[test_edges[:, 0], nonedges[:, 0]]
    v = np.r_[test_edges[:, 1], nonedges[:, 1]]
    prov = np.column_stack([u, v, np.r_[test_edges[:, 2], np.full(len(nonedges), -1)]])
    y = np.r_[np.ones(len(test_edges)), np.zeros(len(nonedges))]
    return LinkDataset(features=edge_feature(Z_U[u], Z_V[v], combiner), labels=y, provenance=prov)


def cross_validate_links(data: LinkDataset, folds: int, rng: np.random.Generator,
                         lr: float = 0.5, epochs: int = 1000) -> tuple[list[float], list[float]]:
    """k-fold CV of logistic regression; returns per-fold AUROC and AUPRC.

    With ``folds == 1`` the classifier is fit and scored on the same rows.
    """
    roc, pr = [], []
    for _, train_idx, test_idx in _fold_pairs(kfold(len(data.labels), folds, rng)):
        model = fit_logreg(data.features[train_idx], data.labels[train_idx], lr=lr, epochs=epochs)
        scores = predict_proba(model, data.features[test_idx])
        roc.append(auroc(data.labels[test_idx], scores))
        pr.append(auprc(data.labels[test_idx], scores))
    return roc, pr


@dataclass(frozen=True)
class LinkProtocol:
    train_fraction: float = 0.5
    repeats: int = 5
    folds: int = 5
    combiner: str = "concat"
    seed: int = 0
    feature_dim: int = 32
    feature_epochs: int = 500
    feature_lr: float = 0.01

    def __post_init__(self):
        if self.repeats < 1 or self.folds < 1:
            raise ConfigError("repeats and folds must be >= 1")
        if self.combiner not in COMBINERS:
            raise ConfigError(f"combiner must be one of {COMBINERS}")


@dataclass
class LinkRun:
    """Everything one repeat of the link protocol produces before scoring."""
    repeat: int
    seed: int
    train_net: MultiplexBipartiteNetwork
    test_edges: np.ndarray
    nonedges: np.ndarray
    embeddings: Embeddings
    untrained: Embeddings | None = None


def link_prediction_runs(net: MultiplexBipartiteNetwork, arch: ArchConfig, tcfg: TrainConfig,
                         protocol: LinkProtocol = LinkProtocol(), include_untrained: bool = False):
    """Yield one :class:`LinkRun` per repeat: split, embed the training subnetwork,
    and draw as many global non-edges as there are held-out edges.

    With ``include_untrained`` the embeddings produced by the initial parameters
    (same split, input features and seed) are attached as well.
    """
    for r in range(protocol.repeats):
        seed = derive_seed(protocol.seed, r)
        split = split_edges(net, protocol.train_fraction, derive_seed(seed, 0))
        train_net = split.train
        train_typed = set(map(tuple, train_net.typed_edges().tolist()))
        if any(tuple(e) in train_typed for e in split.test_edges.tolist()):
            raise DataError("test edges leaked into the training network")
        logger.debug("repeat %d: %d train edges, %d test edges", r, train_net.n_edges,
                     len(split.test_edges))
        X0_U, X0_V = initial_features(train_net, protocol.feature_dim, protocol.feature_epochs,
                                      protocol.feature_lr, derive_seed(seed, 1))
        rcfg = replace(tcfg, seed=derive_seed(seed, 2), log_path=None)
        Z = train(train_net, arch, rcfg, X0_U, X0_V).embeddings
        Z0 = None
        if include_untrained:
            Z0 = train(train_net, arch, replace(rcfg, epochs=0), X0_U, X0_V).embeddings
        nonedges = sample_nonedges(net, len(split.test_edges), make_rng(derive_seed(seed, 3)))
        yield LinkRun(r, seed, train_net, split.test_edges, nonedges, Z, Z0)


def score_link_runs(runs, protocol: LinkProtocol = LinkProtocol(),
                    combiners: tuple[str, ...] | None = None) -> dict[str, EvalReport]:
    """Cross-validate link classifiers over precomputed runs, one report per combiner.

    Fold assignment depends only on the repeat seed, so every combiner and the
    untrained baseline are scored on identical folds.
    """
    combiners = combiners or (protocol.combiner,)
    for c in combiners:
        if c not in COMBINERS:
            raise ConfigError(f"combiner must be one of {COMBINERS}, got {c!r}")
    values = {c: {} for c in combiners}
    for run in runs:
        variants = [("", run.embeddings)]
        if run.untrained is not None:
            variants.append(("_untrained", run.untrained))
        for c in combiners:
            for suffix, Z in variants:
                data = build_link_dataset(Z.Z_U, Z.Z_V, run.test_edges, run.nonedges, c)
                roc, pr = cross_validate_links(data, protocol.folds, make_rng(derive_seed(run.seed, 4)))
                values[c].setdefault("auroc" + suffix, []).extend(roc)
                values[c].setdefault("auprc" + suffix, []).extend(pr)
                if not suffix:
                    logger.info("repeat %d (%s): AUROC %.4f AUPRC %.4f", run.repeat, c,
                                np.mean(roc), np.mean(pr))
    reports = {}
    for c in combiners:
        meta = {"task": "link_prediction", **replace(protocol, combiner=c).__dict__}
        reports[c] = EvalReport({name: MetricSummary.from_values(v) for name, v in values[c].items()},
                                protocol=meta)
    return reports


def eval_link_prediction(net: MultiplexBipartiteNetwork, arch: ArchConfig, tcfg: TrainConfig,
                         protocol: LinkProtocol = LinkProtocol(),
                         include_untrained: bool = False) -> EvalReport:
    """Split, embed the training subnetwork, then cross-validate a link classifier
    on held-out edges plus an equal number of global non-edges.

    With ``include_untrained`` the initial parameters are scored on the same
    splits as well, reported as ``auroc_untrained`` / ``auprc_untrained``.
    """
    runs = link_prediction_runs(net, arch, tcfg, protocol, include_untrained)
    return score_link_runs(runs, protocol)[protocol.combiner]


def eval_node_classification(Z_V, labels_v, folds: int = 5, rng: np.random.Generator | None = None,
                             n_classes: int | None = None, lr: float = 0.05,
                             epochs: int = 100) -> EvalReport:
    """k-fold CV of the softmax SGD classifier over labeled V nodes (label >= 0)."""
    labels_v = np.asarray(labels_v, dtype=np.int64)
    rng = rng if rng is not None else make_rng(0)
    labeled = np.nonzero(labels_v >= 0)[0]
    X, y = np.asarray(Z_V)[labeled], labels_v[labeled]
    n_classes = n_classes if n_classes is not None else int(y.max()) + 1 if y.size else 0
    if np.unique(y).size < 2:
        raise DataError("node classification needs at least 2 classes among labeled nodes")
    micro, macro = [], []
    for _, train_idx, test_idx in _fold_pairs(kfold(len(y), folds, rng)):
        model = fit_softmax_sgd(X[train_idx], y[train_idx], n_classes, lr=lr, epochs=epochs, rng=rng)
        mi, ma = f1_scores(y[test_idx], predict(model, X[test_idx]), n_classes)
        micro.append(mi)
        macro.append(ma)
    meta = {"task": "node_classification", "folds": folds, "n_labeled": int(len(y)),
            "n_classes": n_classes}
    return EvalReport(metrics={"micro_f1": MetricSummary.from_values(micro),
                               "macro_f1": MetricSummary.from_values(macro)}, protocol=meta)
