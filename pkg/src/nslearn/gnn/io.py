"""Versioned model container: one JSON header line + raw float64-LE block."""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from .model import BipartiteArch, GraphArch, FeatureStats, PolicyModel, build_param_spec

__all__ = ["save_model", "load_model", "ModelFormatError", "FORMAT_VERSION"]

FORMAT_VERSION = 1


class ModelFormatError(Exception):
    """Raised on version mismatch or a corrupt/truncated parameter block."""


def save_model(model: PolicyModel, path) -> None:
    header = {
        "format_version": FORMAT_VERSION,
        "variant": model.variant,
        "arch": {k: v for k, v in asdict(model.arch).items() if k != "variant"},
        "param_count": int(model.theta.size),
        "feature_stats": model.stats.to_dict(),
        "meta": model.meta,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8"))
        fh.write(b"\n")
        fh.write(model.theta.astype("<f8").tobytes())


def load_model(path) -> PolicyModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    nl = raw.find(b"\n")
    if nl < 0:
        raise ModelFormatError("missing header line")
    try:
        header = json.loads(raw[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"bad header: {exc}") from exc
    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported format version {header.get('format_version')!r}"
        )
    variant = header.get("variant")
    arch_d = header.get("arch", {})
    if variant == "graph":
        arch = GraphArch(**arch_d)
    elif variant == "bipartite":
        arch = BipartiteArch(**arch_d)
    else:
        raise ModelFormatError(f"unknown variant {variant!r}")
    expected = build_param_spec(arch).total
    declared = header.get("param_count")
    if declared != expected:
        raise ModelFormatError(
            f"header param_count {declared} does not match descriptor ({expected})"
        )
    block = raw[nl + 1 :]
    if len(block) != declared * 8:
        raise ModelFormatError(
            f"parameter block holds {len(block)} bytes, expected {declared * 8}"
        )
    theta = np.frombuffer(block, dtype="<f8").astype(np.float64)
    stats = FeatureStats.from_dict(header.get("feature_stats", {}))
    return PolicyModel(arch=arch, theta=theta, stats=stats, meta=header.get("meta", {}))
