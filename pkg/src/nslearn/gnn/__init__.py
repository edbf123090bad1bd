from .graphs import BipartiteGraph, FeatureGraph, LabeledSample, dump_jsonl, load_jsonl
from .losses import LossSpec, cross_entropy, focal_loss, wce_loss
from .model import (
    BipartiteArch,
    FeatureStats,
    GraphArch,
    PolicyModel,
    bipartite_forward,
    forward_probs,
    graph_forward,
    init_model,
    message_passing_layer,
)
from .gradcheck import gradient_check
from .io import ModelFormatError, load_model, save_model
from .train import TrainConfig, TrainResult, infer_arch, positive_rate, train

__all__ = [
    "BipartiteArch",
    "BipartiteGraph",
    "FeatureGraph",
    "FeatureStats",
    "GraphArch",
    "LabeledSample",
    "LossSpec",
    "ModelFormatError",
    "PolicyModel",
    "TrainConfig",
    "TrainResult",
    "bipartite_forward",
    "cross_entropy",
    "dump_jsonl",
    "focal_loss",
    "forward_probs",
    "gradient_check",
    "graph_forward",
    "infer_arch",
    "init_model",
    "load_jsonl",
    "load_model",
    "message_passing_layer",
    "positive_rate",
    "save_model",
    "train",
    "wce_loss",
]
