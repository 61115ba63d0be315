"""CongFu conditional graph fusion for drug-synergy prediction."""

from ._congfu import (  # noqa: F401
    ConfigError,
    SchemaError,
    SmilesError,
    UndefinedMetricError,
    aucpr,
    auroc,
    default_config,
    edge_list_text,
    evaluate,
    format_mean_std,
    layer_layout,
    parameter_count,
    parse_smiles,
    preprocess,
    revision,
    train,
)

__all__ = [
    "ConfigError",
    "SchemaError",
    "SmilesError",
    "UndefinedMetricError",
    "aucpr",
    "auroc",
    "default_config",
    "edge_list_text",
    "evaluate",
    "format_mean_std",
    "layer_layout",
    "parameter_count",
    "parse_smiles",
    "preprocess",
    "revision",
    "train",
]
