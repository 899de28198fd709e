"""Dual hypergraph convolutional embeddings for multiplex bipartite networks.

Typical use::

    from dualhg import generate_synthetic, ArchConfig, TrainConfig, initial_features, train

    net, _ = generate_synthetic(200, 300, k=2, n_blocks=4, intra_block_edge_prob=0.2,
                                noise_prob=0.01, seed=0)
    X_U, X_V = initial_features(net)
    result = train(net, ArchConfig(k=net.k), TrainConfig(epochs=300), X_U, X_V)
    result.embeddings.Z_U, result.embeddings.Z_V
"""
__version__ = "0.1.0"

from .errors import ConfigError, DataError, DualHGError, NumericError, ShapeError
from .netio import (MultiplexBipartiteNetwork, generate_synthetic, parse_network, read_network,
                    sparsity, sparsity_from_counts, split_edges)
from .hypergraph import DualHypergraphs, build_dual_hypergraphs, propagation_operator
from .model import ArchConfig, Embeddings, backward, forward, init_params
from .train import TrainConfig, autoencoder_features, initial_features, objective_and_grad, train
from .evaluate import (LinkProtocol, auprc, auroc, eval_link_prediction, eval_node_classification,
                       f1_scores)
from .config import RunConfig, parse_config

__all__ = [
    "ConfigError", "DataError", "DualHGError", "NumericError", "ShapeError",
    "MultiplexBipartiteNetwork", "generate_synthetic", "parse_network", "read_network",
    "sparsity", "sparsity_from_counts", "split_edges",
    "DualHypergraphs", "build_dual_hypergraphs", "propagation_operator",
    "ArchConfig", "Embeddings", "backward", "forward", "init_params",
    "TrainConfig", "autoencoder_features", "initial_features", "objective_and_grad", "train",
    "LinkProtocol", "auprc", "auroc", "eval_link_prediction", "eval_node_classification",
    "f1_scores",
    "RunConfig", "parse_config",
]
