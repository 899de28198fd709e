"""Command-line entry point: ``dualhg <subcommand> [options]``.

Exit codes: 0 success, 2 usage or config error, 3 data error, 4 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .config import RunConfig, config_keys, parse_config
from .errors import ConfigError, DualHGError
from .export import format_embeddings, format_matrix_rows, save_checkpoint
from .experiments import ablate, fit_embeddings, link_report, node_report, parse_sweep_values, sweep
from .hypergraph import hypergraph_summary
from .linalg import derive_seed
from .netio import format_edges, format_labels, generate_synthetic, read_network
from .train import initial_features

logger = logging.getLogger("dualhg")

__all__ = ["main", "build_parser"]


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _table(report: dict, metrics) -> str:
    lines = [f"{'metric':<16} {'mean':>8} {'std':>8} {'n':>4}"]
    for name in metrics:
        if name in report:
            m = report[name]
            lines.append(f"{name:<16} {m['mean']:8.4f} {m['std']:8.4f} {len(m['values']):4d}")
    return "\n".join(lines) + "\n"


def _show(args, text: str) -> None:
    """Human-readable summary: standard output unless the report itself goes there."""
    stream = sys.stderr if args.out is None or args.out == "-" else sys.stdout
    stream.write(text)


def resolve_config(args) -> RunConfig:
    """Defaults < ``--config`` file < ``--set`` pairs < dedicated flags."""
    text = ""
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    overrides = {}
    for pair in args.set or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        key, value = pair.split("=", 1)
        overrides[key.strip()] = value
    for key in ("edges", "attrs_u", "attrs_v", "labels", "seed", "repeats", "folds",
                "epochs", "combiner", "mode"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value if isinstance(value, str) else str(value)
    return parse_config(text, overrides)


def _network(cfg: RunConfig):
    if not cfg.edges:
        raise ConfigError("an edge list is required (--edges or 'edges = ...' in the config)")
    net = read_network(cfg.edges, cfg.attrs_u, cfg.attrs_v, cfg.labels)
    if net.dropped_duplicates:
        logger.warning("dropped %d duplicate edge lines", net.dropped_duplicates)
    return net


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    net = _network(cfg)
    log_path = cfg.log or (f"{args.out}.log.tsv" if args.out and args.out != "-" else None)
    result = fit_embeddings(net, cfg, log_path)
    _write(args.out, format_embeddings(net, result.embeddings, cfg.mode))
    if args.checkpoint:
        save_checkpoint(args.checkpoint, result.params, {"config": cfg.to_dict()})
    if result.skipped_negatives:
        logger.warning("%d negative slots had no valid candidate", result.skipped_negatives)
    return 0


def cmd_eval_lp(args) -> int:
    cfg = resolve_config(args)
    report = link_report(_network(cfg), cfg, include_untrained=args.untrained)
    _show(args, _table(report, ("auroc", "auprc", "auroc_untrained", "auprc_untrained")))
    _write(args.out, _json(report))
    return 0


def cmd_eval_nc(args) -> int:
    cfg = resolve_config(args)
    if not cfg.labels:
        raise ConfigError("eval-nc needs --labels")
    report = node_report(_network(cfg), cfg)
    _show(args, _table(report, ("micro_f1", "macro_f1")))
    _write(args.out, _json(report))
    return 0


def cmd_init_features(args) -> int:
    cfg = resolve_config(args)
    net = _network(cfg)
    X_U, X_V = initial_features(net, cfg.feature_dim, cfg.feature_epochs, cfg.feature_lr,
                                derive_seed(cfg.seed, 1))
    lines = [f"# dualhg features dim_u={X_U.shape[1]} dim_v={X_V.shape[1]}\n"]
    lines += format_matrix_rows(net.u_ids, "U", X_U) + format_matrix_rows(net.v_ids, "V", X_V)
    _write(args.out, "".join(lines))
    return 0


def cmd_dump_hg(args) -> int:
    cfg = resolve_config(args)
    rows = hypergraph_summary(_network(cfg))
    cols = ("domain", "type", "nodes", "hyperedges", "nnz", "mean_edge_degree")
    lines = ["#" + "\t".join(cols) + "\n"]
    for row in rows:
        vals = [str(row[c]) if c != "mean_edge_degree" else f"{row[c]:.6g}" for c in cols]
        lines.append("\t".join(vals) + "\n")
    _write(args.out, "".join(lines))
    return 0


def cmd_gen_synth(args) -> int:
    seed = args.seed if args.seed is not None else 0
    net, _ = generate_synthetic(args.n_u, args.n_v, args.k, args.blocks, args.intra,
                                args.noise, seed)
    _write(args.out, format_edges(net))
    if args.labels_out:
        _write(args.labels_out, format_labels(net))
    logger.info("generated %d edges over %d x %d nodes", net.n_edges, net.n_u, net.n_v)
    return 0


def cmd_sweep(args) -> int:
    cfg = resolve_config(args)
    values = parse_sweep_values(args.param, args.values)
    report = sweep(_network(cfg), cfg, args.param, values, args.task)
    metric = "auroc" if args.task == "lp" else "macro_f1"
    for value, sub in report["reports"].items():
        m = sub[metric]
        _show(args, f"{args.param}={value}\t{metric} {m['mean']:.4f} +- {m['std']:.4f}\n")
    _write(args.out, _json({**report, "config": cfg.to_dict()}))
    return 0


def cmd_ablate(args) -> int:
    cfg = resolve_config(args)
    report = ablate(_network(cfg), cfg, per_type=args.per_type)
    for name, auc in report["summary"].items():
        _show(args, f"{name}\tauroc {auc:.4f}\n")
    _write(args.out, _json({**report, "config": cfg.to_dict()}))
    return 0


def _common(p: argparse.ArgumentParser, data: bool = True) -> None:
    if data:
        p.add_argument("--edges", help="edge list TSV: u_id, v_id, type")
        p.add_argument("--attrs-u", dest="attrs_u", help="U attribute TSV")
        p.add_argument("--attrs-v", dest="attrs_v", help="V attribute TSV")
        p.add_argument("--labels", help="V label TSV: v_id, class")
        p.add_argument("--config", help="file of 'key = value' lines")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help=f"override one config key ({', '.join(config_keys())})")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path ('-' or omitted: standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualhg", description="Dual hypergraph convolutional "
                                     "embeddings for multiplex bipartite networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train and write node embeddings")
    _common(p)
    p.add_argument("--epochs", type=int)
    p.add_argument("--mode", choices=("sym", "asym"))
    p.add_argument("--checkpoint", metavar="PREFIX", help="also write PREFIX.npz and PREFIX.json")
    p.set_defaults(func=cmd_train)

    for name, func, help_ in (("eval-lp", cmd_eval_lp, "link prediction protocol"),
                              ("eval-nc", cmd_eval_nc, "node classification protocol")):
        p = sub.add_parser(name, help=help_)
        _common(p)
        p.add_argument("--repeats", type=int)
        p.add_argument("--folds", type=int)
        p.add_argument("--epochs", type=int)
        p.add_argument("--mode", choices=("sym", "asym"))
        if name == "eval-lp":
            p.add_argument("--combiner", choices=("concat", "hadamard"))
            p.add_argument("--untrained", action="store_true",
                           help="also score the initial (epoch 0) embeddings")
        p.set_defaults(func=func)

    p = sub.add_parser("init-features", help="write the input feature matrices")
    _common(p)
    p.set_defaults(func=cmd_init_features)

    p = sub.add_parser("dump-hg", help="per-hypergraph size statistics")
    _common(p)
    p.set_defaults(func=cmd_dump_hg)

    p = sub.add_parser("gen-synth", help="write a planted co-cluster network")
    _common(p, data=False)
    p.add_argument("--n-u", dest="n_u", type=int, default=200)
    p.add_argument("--n-v", dest="n_v", type=int, default=300)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--intra", type=float, default=0.2)
    p.add_argument("--noise", type=float, default=0.01)
    p.add_argument("--labels-out", dest="labels_out")
    p.set_defaults(func=cmd_gen_synth)

    p = sub.add_parser("sweep", help="evaluate over a list of parameter values")
    _common(p)
    p.add_argument("--param", required=True, choices=("lambda", "layers", "neg_samples",
                                                      "keep_fraction"))
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--task", choices=("lp", "nc"), default="lp")
    p.add_argument("--repeats", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate", help="intra/inter message passing ablation")
    _common(p)
    p.add_argument("--per-type", dest="per_type", action="store_true",
                   help="add runs on the base network and on each single edge type")
    p.add_argument("--repeats", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DualHGError as exc:
        sys.stderr.write(f"dualhg {args.command}: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
