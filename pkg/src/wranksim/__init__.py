"""Ordinal classification with ranking-similarity regularization.

The package trains a from-scratch MLP classifier for ordered, imbalanced
labels and regularizes the output layer so that the cosine-similarity
ranking among per-class weight vectors matches the ranking induced by
label distances. The rank step is differentiated with a perturbation
surrogate; a batch-wise variant of the same objective on feature
embeddings is included for comparison, along with a large-margin cosine
loss, deterministic synthetic data, and a config-driven CLI.
"""

__version__ = "0.1.0"

from .backend import USING_NUMBA
from .data import Dataset, SynthConfig, binomial_bell_prior, generate, load_csv, save_csv, split
from .exceptions import (
    DomainError,
    ParseError,
    TrainingDivergedError,
    ValidationError,
    WranksimError,
)
from .gradcheck import GradCheckConfig, run_gradcheck
from .losses import LmclConfig, cross_entropy, lmcl
from .metrics import MetricsReport, compute_metrics
from .model import (
    Activation,
    FeatureGroupSet,
    ForwardCache,
    GradientSet,
    Mlp,
    MlpConfig,
    backward,
    forward,
    forward_batch,
    fuse,
    init,
    load_checkpoint,
    save_checkpoint,
)
from .numeric import cosine_similarity, cosine_similarity_grad, seeded_rng, softmax
from .optim import OptimConfig, OptimizerKind, OptimizerState, optimizer_step
from .ranking import TiePolicy, blackbox_rank_grad, rank, rank_bruteforce
from .regularizer import (
    OrdinalClassSet,
    label_similarity,
    ranksim_loss,
    total_loss,
    w_ranksim_loss,
    weight_similarity,
)
from .train import (
    EpochRecord,
    LossKind,
    RegularizerKind,
    SweepReport,
    TrainConfig,
    TrainResult,
    evaluate,
    sweep_batch_size,
    train,
)

__all__ = [
    "Activation",
    "Dataset",
    "DomainError",
    "EpochRecord",
    "FeatureGroupSet",
    "ForwardCache",
    "GradCheckConfig",
    "GradientSet",
    "LmclConfig",
    "LossKind",
    "MetricsReport",
    "Mlp",
    "MlpConfig",
    "OptimConfig",
    "OptimizerKind",
    "OptimizerState",
    "OrdinalClassSet",
    "ParseError",
    "RegularizerKind",
    "SweepReport",
    "SynthConfig",
    "TiePolicy",
    "TrainConfig",
    "TrainResult",
    "TrainingDivergedError",
    "USING_NUMBA",
    "ValidationError",
    "WranksimError",
    "backward",
    "binomial_bell_prior",
    "blackbox_rank_grad",
    "compute_metrics",
    "cosine_similarity",
    "cosine_similarity_grad",
    "cross_entropy",
    "evaluate",
    "forward",
    "forward_batch",
    "fuse",
    "generate",
    "init",
    "label_similarity",
    "lmcl",
    "load_checkpoint",
    "load_csv",
    "optimizer_step",
    "rank",
    "rank_bruteforce",
    "ranksim_loss",
    "run_gradcheck",
    "save_checkpoint",
    "save_csv",
    "seeded_rng",
    "softmax",
    "split",
    "sweep_batch_size",
    "total_loss",
    "train",
    "w_ranksim_loss",
    "weight_similarity",
]
