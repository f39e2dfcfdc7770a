"""Flow classification, remediation suggestions and feedback retraining."""

from ._flowguard import (
    Dataset,
    Network,
    Service,
    __version__,
    build_dataset,
    default_layer_sizes,
    evaluate,
    features_from_csv,
    generate_corpus,
    leaky_relu,
    load_dataset,
    render_report,
    save_dataset,
    simulate_csv,
    softmax,
    suggest,
    train,
)

__all__ = [
    "Dataset",
    "Network",
    "Service",
    "build_dataset",
    "default_layer_sizes",
    "evaluate",
    "features_from_csv",
    "generate_corpus",
    "leaky_relu",
    "load_dataset",
    "render_report",
    "save_dataset",
    "simulate_csv",
    "softmax",
    "suggest",
    "train",
]
