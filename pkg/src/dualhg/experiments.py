"""Experiment harnesses shared by the command line and the demos.

Every function is a pure function of ``(network, RunConfig)``; reports are
plain dicts that embed the resolved config.
"""
from __future__ import annotations

import logging

import numpy as np

from .config import RunConfig
from .errors import ConfigError
from .evaluate import eval_link_prediction, eval_node_classification
from .linalg import derive_seed, make_rng
from .netio import MultiplexBipartiteNetwork, collapse_types, restrict_to_type, subsample_edges
from .train import TrainResult, initial_features, train

logger = logging.getLogger(__name__)

__all__ = ["SWEEPABLE", "fit_embeddings", "link_report", "node_report", "sweep", "ablate",
           "parse_sweep_values"]

SWEEPABLE = ("lambda", "layers", "neg_samples", "keep_fraction")
ABLATION_FLAGS = ((True, True), (True, False), (False, True), (False, False))


def fit_embeddings(net: MultiplexBipartiteNetwork, cfg: RunConfig,
                   log_path: str | None = None) -> TrainResult:
    """Initial features (attributes or autoencoder codes), then full training."""
    X0_U, X0_V = initial_features(net, cfg.feature_dim, cfg.feature_epochs, cfg.feature_lr,
                                  derive_seed(cfg.seed, 1))
    return train(net, cfg.arch(net.k), cfg.train_config(log_path), X0_U, X0_V)


def link_report(net: MultiplexBipartiteNetwork, cfg: RunConfig,
                include_untrained: bool = False) -> dict:
    report = eval_link_prediction(net, cfg.arch(net.k), cfg.train_config(), cfg.protocol(),
                                  include_untrained)
    return {**report.to_dict(), "config": cfg.to_dict(), "network": _describe(net)}


def node_report(net: MultiplexBipartiteNetwork, cfg: RunConfig) -> dict:
    """Embed the whole network, then cross-validate the softmax classifier on V labels."""
    if net.labels_v is None:
        raise ConfigError("node classification needs a labels file")
    Z = fit_embeddings(net, cfg).embeddings
    report = eval_node_classification(Z.Z_V, net.labels_v, cfg.folds,
                                      make_rng(derive_seed(cfg.seed, 5)),
                                      n_classes=len(net.class_names), lr=cfg.nc_lr,
                                      epochs=cfg.nc_epochs)
    return {**report.to_dict(), "config": cfg.to_dict(), "network": _describe(net)}


def _describe(net: MultiplexBipartiteNetwork) -> dict:
    return {"n_u": net.n_u, "n_v": net.n_v, "edge_types": list(net.edge_types),
            "n_edges": net.n_edges}


def parse_sweep_values(param: str, text: str) -> list:
    """Comma-separated values, typed for ``param``."""
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose from {SWEEPABLE}")
    cast = int if param in ("layers", "neg_samples") else float
    try:
        values = [cast(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad value list for {param}: {text!r}") from None
    if not values:
        raise ConfigError("sweep needs at least one value")
    return values


def sweep(net: MultiplexBipartiteNetwork, cfg: RunConfig, param: str, values,
          task: str = "lp") -> dict:
    """One full evaluation per value, each under its own derived seed.

    ``keep_fraction`` subsamples the edges before anything else happens.
    """
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose from {SWEEPABLE}")
    if task not in ("lp", "nc"):
        raise ConfigError(f"task must be lp or nc, got {task!r}")
    reports = {}
    for i, value in enumerate(values):
        sub_cfg = cfg.override(seed=derive_seed(cfg.seed, i))
        sub_net = net
        if param == "keep_fraction":
            sub_net = subsample_edges(net, value, derive_seed(cfg.seed, i, 1))
        else:
            sub_cfg = sub_cfg.override(**{param: value})
        logger.info("sweep %s=%s", param, value)
        report = link_report(sub_net, sub_cfg) if task == "lp" else node_report(sub_net, sub_cfg)
        reports[str(value)] = {**report, "sweep": {"param": param, "value": value}}
    return {"param": param, "task": task, "values": list(values), "reports": reports}


def _flag_name(intra: bool, inter: bool) -> str:
    return f"intra={'on' if intra else 'off'},inter={'on' if inter else 'off'}"


def ablate(net: MultiplexBipartiteNetwork, cfg: RunConfig, per_type: bool = False) -> dict:
    """Link prediction under the four intra/inter combinations.

    All combinations share ``cfg.seed`` so they see identical splits and
    input features. ``per_type`` adds one run on the type-collapsed base
    network and one per single edge type, all with the configured flags.
    """
    out = {"flags": {}}
    for intra, inter in ABLATION_FLAGS:
        name = _flag_name(intra, inter)
        logger.info("ablation %s", name)
        report = link_report(net, cfg.override(intra=intra, inter=inter))
        out["flags"][name] = {**report, "flags": {"intra": intra, "inter": inter}}
    if per_type:
        out["per_type"] = {"base": link_report(collapse_types(net), cfg)}
        for t, label in enumerate(net.edge_types):
            out["per_type"][label] = link_report(restrict_to_type(net, t), cfg)
    out["summary"] = {name: r["auroc"]["mean"] for name, r in out["flags"].items()}
    return out


def mean_auroc(report: dict) -> float:
    return float(np.mean(report["auroc"]["values"]))
