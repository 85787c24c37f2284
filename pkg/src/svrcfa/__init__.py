"""Single-source 2D DOA estimation with reduced-dimension SVR and a closed-form elevation solver."""

from svrcfa.array import (
    ArrayGeometry,
    SnapshotMatrix,
    SourceTruth,
    ideal_covariance,
    simulate_snapshots,
    steering_vector,
)
from svrcfa.estimator import DoaEstimate, estimate_doa
from svrcfa.features import (
    BORESIGHT,
    PhaseVector,
    extract_phase_vector,
    noiseless_phase,
    normalize_features,
    sample_covariance,
    unwrap_phases,
)
from svrcfa.svr import SvrHyperparams, SvrModel, TrainingSet, build_training_set, train_svr

__all__ = [
    "ArrayGeometry",
    "BORESIGHT",
    "DoaEstimate",
    "PhaseVector",
    "SnapshotMatrix",
    "SourceTruth",
    "SvrHyperparams",
    "SvrModel",
    "TrainingSet",
    "build_training_set",
    "estimate_doa",
    "extract_phase_vector",
    "ideal_covariance",
    "noiseless_phase",
    "normalize_features",
    "sample_covariance",
    "simulate_snapshots",
    "steering_vector",
    "train_svr",
    "unwrap_phases",
]
