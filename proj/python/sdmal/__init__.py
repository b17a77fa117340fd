"""Margin-based active domain adaptation toolkit (python layer over the C++ core)."""

from ._core import (  # noqa: F401
    DomainDataset,
    ExperimentConfig,
    LinearClassifier,
    LossKind,
    Prop1Report,
    RoundMetrics,
    Sample,
    Strategy,
    SyntheticConfig,
    __version__,
    active_learning_loop,
    classify,
    cross_entropy,
    cross_entropy_grad_logits,
    dynamic_margin_loss,
    dynamic_margin_loss_grad_logits,
    estimated_loss_grad,
    evaluate_accuracy,
    generate_shifted_gaussians,
    grad_f_query,
    load_feature_csv,
    margin_loss,
    margin_loss_grad_features,
    margin_loss_grad_logits,
    q_confidence,
    q_entropy,
    q_margin,
    q_random,
    q_sdm_g,
    softmax,
    top2,
    verify_prop1,
)
