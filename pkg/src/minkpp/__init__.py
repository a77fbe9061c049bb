"""Membership-inference scoring for language models.

Per-token categorical statistics in, detector scores and evaluation
reports out. Ships the calibrated min-k detector, the classic baselines
(loss, zlib, reference, lowercase, neighbor), windowed online scanning,
a strict JSONL wire format, and an exact n-gram toy LM for end-to-end
verification at desk scale.
"""

__version__ = "0.1.0"

from minkpp.types import (  # noqa: F401
    DecisionRule,
    DetectorConfig,
    Label,
    Method,
    PositionStats,
    ReferenceStats,
    ScoredExample,
    SequenceRecord,
    Variant,
    validate_record,
)
from minkpp.moments import categorical_moments, shift_logits_then_moments  # noqa: F401
from minkpp.token_scores import mink_token, minkpp_token  # noqa: F401
from minkpp.aggregation import min_k_mean, sweep_k  # noqa: F401
from minkpp.detectors import (  # noqa: F401
    score_dataset,
    score_loss,
    score_lowercase,
    score_mink,
    score_minkpp,
    score_neighbor,
    score_record,
    score_ref,
    score_zlib,
)
from minkpp.evaluation import auroc, decide, evaluate, roc_curve, tpr_at_fpr  # noqa: F401
from minkpp.online import build_online_dataset, online_scan, windowed_examples  # noqa: F401
