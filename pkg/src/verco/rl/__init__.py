from .buffer import RlBuffer, Transition
from .distribution import (
    ActionDistribution,
    action_distribution,
    candidate_sequences,
    score_action_candidates,
)
from .losses import clipped_surrogate_terms, gae, grouped_mean, value_loss_terms
from .symbolic import (
    ENCODING_LENGTH,
    SymbolicAgent,
    SymbolicPolicy,
    SymbolicTransition,
    encode_window,
    rollout_symbolic,
    update_symbolic,
)
from .trainer import (
    EpisodeMetrics,
    PolicyMessenger,
    RlConfig,
    RolloutResult,
    TeacherMessenger,
    UpdateDiagnostics,
    VercoAgent,
    critic_loss,
    overall_update,
    policy_loss,
    rollout,
)

__all__ = [
    "ActionDistribution",
    "ENCODING_LENGTH",
    "EpisodeMetrics",
    "PolicyMessenger",
    "RlBuffer",
    "RlConfig",
    "RolloutResult",
    "SymbolicAgent",
    "SymbolicPolicy",
    "SymbolicTransition",
    "TeacherMessenger",
    "Transition",
    "UpdateDiagnostics",
    "VercoAgent",
    "action_distribution",
    "candidate_sequences",
    "clipped_surrogate_terms",
    "critic_loss",
    "encode_window",
    "gae",
    "grouped_mean",
    "overall_update",
    "policy_loss",
    "rollout",
    "rollout_symbolic",
    "score_action_candidates",
    "update_symbolic",
    "value_loss_terms",
]
