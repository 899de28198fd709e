import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_network
from dualhg.errors import ConfigError, DataError, ShapeError
from dualhg.evaluate import (LinkProtocol, LinkRun, MetricSummary, auprc, auroc,
                             build_link_dataset, cross_validate_links, edge_feature,
                             eval_link_prediction, eval_node_classification, f1_scores,
                             fit_logreg, fit_softmax_sgd, kfold, predict, predict_proba,
                             sample_nonedges, score_link_runs)
from dualhg.linalg import make_rng
from dualhg.model import ArchConfig, Embeddings
from dualhg.netio import parse_network
from dualhg.train import TrainConfig
from oracles import auprc_sweep, auroc_pairs


def blobs(rng, n, centers, scale=1.0):
    centers = np.asarray(centers, dtype=float)
    y = rng.integers(0, len(centers), size=n)
    return centers[y] + scale * rng.normal(size=(n, centers.shape[1])), y


# -- edge features and non-edges --------------------------------------------

def test_edge_feature_examples():
    assert not edge_feature(np.zeros(3), np.zeros(3)).any()
    assert edge_feature(np.ones(32), np.ones(32), "concat").shape == (64,)
    assert edge_feature([1.0, 2.0], [3.0, 4.0], "hadamard").tolist() == [3.0, 8.0]
    with pytest.raises(ShapeError):
        edge_feature(np.ones(2), np.ones(3), "hadamard")
    with pytest.raises(ConfigError):
        edge_feature(np.ones(2), np.ones(2), "sum")


def test_nonedges_infeasible_and_forced():
    full = parse_network("a\tx\tt\na\ty\tt\nb\tx\tt\nb\ty\tt\n")
    with pytest.raises(DataError):
        sample_nonedges(full, 1, make_rng(0))
    one_missing = parse_network("a\tx\tt\na\ty\tt\nb\tx\tt\n")
    pair = sample_nonedges(one_missing, 1, make_rng(0))
    assert pair.tolist() == [[1, 1]]


def test_nonedges_distinct_and_uniform():
    net = random_network(np.random.default_rng(0), 4, 5, 2, density=0.2)
    linked = set(net.pair_keys().tolist())
    free = [k for k in range(20) if k not in linked]
    counts = dict.fromkeys(free, 0)
    rng = make_rng(1)
    for _ in range(10_000 // 2):
        for u, v in sample_nonedges(net, 2, rng):
            counts[u * 5 + v] += 1
    assert set(counts) == set(free)
    p = 1 / len(free)
    sigma = np.sqrt(10_000 * p * (1 - p))
    assert all(abs(c - 10_000 * p) < 3 * sigma for c in counts.values())
    many = sample_nonedges(net, len(free), rng)
    assert len({tuple(x) for x in many.tolist()}) == len(free)


# -- classifiers -----------------------------------------------------------

def test_logreg_separable_and_constant():
    X = np.linspace(-1, 1, 40)[:, None]
    y = (X[:, 0] > 0.05).astype(float)
    model = fit_logreg(X, y, epochs=2000)
    assert np.array_equal(predict_proba(model, X) > 0.5, y.astype(bool))
    flat = fit_logreg(np.ones((6, 2)), np.array([0, 1, 0, 1, 1, 0.0]))
    assert np.ptp(predict_proba(flat, np.ones((6, 2)))) == 0
    with pytest.raises(DataError):
        fit_logreg(X, np.full(40, 2.0))


def test_logreg_matches_grid_searched_separator():
    rng = np.random.default_rng(0)
    X, y = blobs(rng, 200, [[-1.5, 0.0], [1.5, 0.5]], scale=0.6)
    acc = np.mean((predict_proba(fit_logreg(X, y), X) > 0.5) == y)
    best = 0.0
    for angle in np.linspace(0, np.pi, 90, endpoint=False):
        w = np.array([np.cos(angle), np.sin(angle)])
        s = X @ w
        for thr in np.quantile(s, np.linspace(0, 1, 101)):
            best = max(best, np.mean((s > thr) == y), np.mean((s <= thr) == y))
    assert acc >= 0.95 and acc >= best - 0.02


def test_softmax_binary_agrees_with_logreg():
    rng = np.random.default_rng(1)
    X, y = blobs(rng, 200, [[-1.0, -1.0], [1.0, 1.0]], scale=0.9)
    sm = fit_softmax_sgd(X, y, 2, rng=make_rng(0))
    lr = fit_logreg(X, y.astype(float))
    acc_sm = np.mean(predict(sm, X) == y)
    acc_lr = np.mean((predict_proba(lr, X) > 0.5) == y)
    assert abs(acc_sm - acc_lr) <= 0.02


def test_softmax_small_and_multiclass():
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    sm = fit_softmax_sgd(X, np.array([0, 1]), 2, rng=make_rng(0))
    assert predict(sm, X).tolist() == [0, 1]
    rng = np.random.default_rng(2)
    centers = 4 * np.eye(5)
    X, y = blobs(rng, 300, centers, scale=0.7)
    sm = fit_softmax_sgd(X, y, 5, rng=make_rng(1))
    nearest = np.argmin(((X[:, None, :] - centers[None]) ** 2).sum(-1), axis=1)
    acc = np.mean(predict(sm, X) == y)
    assert acc >= 0.9 and acc >= np.mean(nearest == y) - 0.05
    with pytest.raises(DataError):
        fit_softmax_sgd(X, y, 1)


def test_predict_ties_go_to_lowest_class():
    from dualhg.evaluate import SoftmaxModel
    model = SoftmaxModel(W=np.zeros((2, 3)), b=np.zeros(3), mean=np.zeros(2), scale=np.ones(2))
    assert predict(model, np.ones((4, 2))).tolist() == [0, 0, 0, 0]


# -- metrics ---------------------------------------------------------------

def test_metric_fixed_examples():
    labels, scores = [1, 0, 1, 0], [0.9, 0.8, 0.3, 0.2]
    assert auroc(labels, scores) == 0.75
    assert auprc(labels, scores) == 5 / 6
    assert auroc([1, 1, 0, 0], [4, 3, 2, 1]) == 1.0
    assert auprc([1, 1, 0, 0], [4, 3, 2, 1]) == 1.0
    assert auroc([1, 0, 1, 0, 0], [0.3] * 5) == 0.5
    assert auprc([1, 0, 1, 0, 0], [0.3] * 5) == pytest.approx(2 / 5)


def test_metric_errors():
    with pytest.raises(DataError):
        auroc([1, 1], [0.2, 0.3])
    with pytest.raises(DataError):
        auprc([0, 0], [0.2, 0.3])


labels_scores = st.integers(2, 50).flatmap(lambda n: st.tuples(
    st.lists(st.booleans(), min_size=n, max_size=n).filter(lambda l: 0 < sum(l) < len(l)),
    st.lists(st.integers(0, 8), min_size=n, max_size=n)))


@given(labels_scores)
def test_metrics_match_oracles(data):
    labels, scores = data
    scores = [s / 8 for s in scores]  # coarse grid: plenty of ties
    assert abs(auroc(labels, scores) - auroc_pairs(labels, scores)) <= 1e-12
    assert abs(auprc(labels, scores) - auprc_sweep(labels, scores)) <= 1e-12


@given(labels_scores)
def test_auroc_rank_invariances(data):
    labels, scores = data
    s = np.asarray(scores, dtype=float)
    assert auroc(labels, s) == pytest.approx(auroc(labels, np.exp(s) * 3 - 1), abs=1e-12)
    distinct = s + np.arange(len(s)) * 1e-3
    assert auroc(labels, distinct) + auroc(labels, -distinct) == pytest.approx(1.0, abs=1e-12)


def test_f1_examples():
    assert f1_scores([0, 1, 2], [0, 1, 2], 3) == (1.0, 1.0)
    micro, macro = f1_scores([0, 0, 1, 1], [0, 1, 1, 1], 2)
    assert micro == 0.75 and macro == pytest.approx((2 / 3 + 0.8) / 2)
    micro, macro = f1_scores(np.repeat(np.arange(5), 4), np.zeros(20, int), 5)
    assert micro == pytest.approx(0.2) and macro == pytest.approx((2 * 4 / (2 * 4 + 16)) / 5)


@given(st.integers(2, 6).flatmap(lambda c: st.tuples(
    st.just(c), st.lists(st.tuples(st.integers(0, c - 1), st.integers(0, c - 1)), min_size=1))))
def test_micro_f1_is_accuracy(data):
    c, pairs = data
    y, p = np.array(pairs).T
    assert f1_scores(y, p, c)[0] == pytest.approx(np.mean(y == p))


def test_kfold_examples():
    assert [len(f) for f in kfold(10, 5, make_rng(0))] == [2] * 5
    assert sorted(len(f) for f in kfold(7, 5, make_rng(0))) == [1, 1, 1, 2, 2]
    with pytest.raises(ConfigError):
        kfold(3, 4, make_rng(0))


@given(st.integers(1, 60), st.integers(1, 10), st.integers(0, 10**6))
def test_kfold_partition(n, k, seed):
    if k > n:
        return
    folds = kfold(n, k, make_rng(seed))
    joined = np.concatenate(folds)
    assert sorted(joined.tolist()) == list(range(n))
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1


def test_metric_summary_uses_sample_std():
    m = MetricSummary.from_values([1.0, 2.0, 4.0])
    assert m.std == pytest.approx(np.std([1, 2, 4], ddof=1)) and m.mean == pytest.approx(7 / 3)
    assert MetricSummary.from_values([0.5]).std == 0.0


# -- protocols -------------------------------------------------------------

def test_perfectly_separable_link_scores():
    Z_U = np.array([[1.0], [-1.0]])
    Z_V = np.array([[1.0], [1.0], [-1.0]])
    test_edges = np.array([[0, 0, 0], [0, 1, 0], [1, 2, 0]])
    nonedges = np.array([[1, 0], [1, 1], [0, 2]])
    data = build_link_dataset(Z_U, Z_V, test_edges, nonedges, "hadamard")
    roc, pr = cross_validate_links(data, 1, make_rng(0))
    assert roc == [1.0] and pr == [1.0]
    assert data.provenance[-1].tolist() == [0, 2, -1]


def test_link_protocol_arithmetic(small_synth):
    net, _ = small_synth
    protocol = LinkProtocol(repeats=2, folds=3, feature_epochs=5)
    rep = eval_link_prediction(net, ArchConfig(k=2, dim=8), TrainConfig(epochs=2), protocol)
    assert len(rep.metrics["auroc"].values) == len(rep.metrics["auprc"].values) == 6
    d = json.loads(rep.to_json())
    assert d["protocol"]["repeats"] == 2 and d["protocol"]["combiner"] == "concat"
    with pytest.raises(ConfigError):
        LinkProtocol(combiner="sum")


def test_untrained_embeddings_are_near_chance(small_synth):
    net, _ = small_synth
    protocol = LinkProtocol(repeats=2, folds=3, feature_epochs=5)
    rep = eval_link_prediction(net, ArchConfig(k=2, dim=8), TrainConfig(epochs=0), protocol)
    assert 0.4 <= rep.metrics["auroc"].mean <= 0.6


def test_score_link_runs_shares_folds_across_variants():
    rng = np.random.default_rng(0)
    Z = Embeddings(rng.normal(size=(6, 3)), rng.normal(size=(7, 3)))
    run = LinkRun(0, 11, None, np.array([[0, 1, 0], [2, 3, 0], [4, 5, 1], [1, 1, 0]]),
                  np.array([[5, 6], [3, 3], [0, 0], [2, 2]]), Z, Z)
    reps = score_link_runs([run], LinkProtocol(folds=2), ("concat", "hadamard"))
    for rep in reps.values():
        assert rep.metrics["auroc"].values == rep.metrics["auroc_untrained"].values


def test_node_classification_examples():
    labels = np.repeat(np.arange(3), 10)
    perfect = eval_node_classification(np.eye(3)[labels], labels, folds=1, rng=make_rng(0))
    assert perfect.metrics["micro_f1"].mean == perfect.metrics["macro_f1"].mean == 1.0
    rng = np.random.default_rng(4)
    noise = rng.normal(size=(60, 4))
    shuffled = rng.permutation(np.repeat([0, 1, 1, 1], 15))
    rep = eval_node_classification(noise, shuffled, folds=5, rng=make_rng(1))
    assert abs(rep.metrics["micro_f1"].mean - 0.75) <= 0.1
    partial = np.where(np.arange(30) % 3 == 0, -1, labels)
    rep = eval_node_classification(np.eye(3)[labels], partial, folds=2, rng=make_rng(0))
    assert rep.protocol["n_labeled"] == 20
    with pytest.raises(DataError):
        eval_node_classification(np.ones((4, 2)), np.zeros(4, int), folds=2)
