"""Interval-based DTW matching of longitudinal records."""

from ._idtw import (
    ConfigError,
    DataError,
    Error,
    KbError,
    KnowledgeBase,
    ParseError,
    abstract_gradient,
    abstract_state,
    dtw_distance,
    experiment_count,
    generate_synthetic,
    k_values,
    kb_band_radius,
    load_knowledge_base,
    paired_t_test,
    parse_knowledge_base,
    roc_auc,
    run_cv,
    run_grid,
    separable_domain_json,
    youden_optimal,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Error",
    "KbError",
    "KnowledgeBase",
    "ParseError",
    "abstract_gradient",
    "abstract_state",
    "dtw_distance",
    "experiment_count",
    "generate_synthetic",
    "k_values",
    "kb_band_radius",
    "load_knowledge_base",
    "paired_t_test",
    "parse_knowledge_base",
    "roc_auc",
    "run_cv",
    "run_grid",
    "separable_domain_json",
    "youden_optimal",
]
