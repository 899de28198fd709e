"""On-disk formats: embedding/feature TSV and parameter checkpoints."""
from __future__ import annotations

import json
import re

import numpy as np

from .errors import DataError, ShapeError
from .model import Embeddings
from .netio import MultiplexBipartiteNetwork

__all__ = ["format_embeddings", "parse_embeddings", "format_matrix_rows",
           "save_checkpoint", "load_checkpoint", "CHECKPOINT_FORMAT"]

CHECKPOINT_FORMAT = "dualhg-params"
CHECKPOINT_VERSION = 1
_HEADER = re.compile(r"# dualhg v1 dim=(\d+) mode=(sym|asym)$")


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def format_matrix_rows(ids, domain: str, X: np.ndarray) -> list[str]:
    return ["\t".join([node, domain, *map(_fmt, row)]) + "\n" for node, row in zip(ids, X)]


def format_embeddings(net: MultiplexBipartiteNetwork, Z: Embeddings, mode: str) -> str:
    """Header line, then ``node_id  U|V  f1 ... fd`` rows with 9 significant digits."""
    dim = Z.Z_U.shape[1]
    lines = [f"# dualhg v1 dim={dim} mode={mode}\n"]
    lines += format_matrix_rows(net.u_ids, "U", Z.Z_U)
    lines += format_matrix_rows(net.v_ids, "V", Z.Z_V)
    return "".join(lines)


def parse_embeddings(text: str) -> tuple[dict, dict, str]:
    """Inverse of :func:`format_embeddings`: ``({"U": {id: vec}, "V": {...}}, dims, mode)``."""
    lines = text.splitlines()
    match = _HEADER.match(lines[0]) if lines else None
    if match is None:
        raise DataError("embedding file: missing or malformed header")
    dim, mode = int(match.group(1)), match.group(2)
    out: dict[str, dict[str, np.ndarray]] = {"U": {}, "V": {}}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split("\t")
        if len(parts) != dim + 2 or parts[1] not in out:
            raise DataError(f"embedding file line {lineno}: expected id, U|V and {dim} values")
        out[parts[1]][parts[0]] = np.array([float(x) for x in parts[2:]])
    return out, {"dim": dim}, mode


def save_checkpoint(prefix: str, params: dict[str, np.ndarray], meta: dict | None = None) -> None:
    """Write ``<prefix>.npz`` (parameter blob) and ``<prefix>.json`` (shape manifest)."""
    names = sorted(params)
    with open(f"{prefix}.npz", "wb") as fh:
        np.savez(fh, **{name: params[name] for name in names})
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "shapes": {name: list(params[name].shape) for name in names},
        "meta": meta or {},
    }
    with open(f"{prefix}.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_checkpoint(prefix: str) -> tuple[dict[str, np.ndarray], dict]:
    """Read a checkpoint back, checking the blob against its manifest."""
    try:
        with open(f"{prefix}.json", encoding="utf-8") as fh:
            manifest = json.load(fh)
        with np.load(f"{prefix}.npz") as blob:
            params = {name: blob[name] for name in blob.files}
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read checkpoint {prefix}: {exc}") from exc
    if manifest.get("format") != CHECKPOINT_FORMAT or manifest.get("version") != CHECKPOINT_VERSION:
        raise DataError(f"checkpoint {prefix}: unsupported format")
    shapes = {name: tuple(shape) for name, shape in manifest["shapes"].items()}
    if set(shapes) != set(params):
        raise ShapeError(f"checkpoint {prefix}: blob and manifest list different parameters")
    for name, shape in shapes.items():
        if params[name].shape != shape:
            raise ShapeError(f"checkpoint {prefix}: {name} has shape {params[name].shape}, "
                             f"manifest says {shape}")
    return params, manifest.get("meta", {})
