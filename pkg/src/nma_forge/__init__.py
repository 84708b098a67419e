"""nma-forge: simulation toolkit for treatment-ranking quality in NMA.

Builds synthetic multi-trial datasets on an evidence network, fits the
Bayesian random-effects binomial model by MCMC, scores rank-probability
and SUCRA estimation quality over many replications, and ranks candidate
future trials by network-geometry irregularity.
"""

from .generate import (DgmKind, Dataset, ModelParams, TrialEffects,
                       absolute_effect, baseline_probability,
                       generate_dataset, sample_relative_effects)
from .harness import (ExperimentConfig, ExperimentRecord, SuiteResult,
                      derive_seed, load_experiment_record, records_equivalent,
                      run_experiment, run_suite, write_experiment_outputs)
from .model import LatentState, log_likelihood, log_prior, sigma_inverse
from .network import (EvidenceNetwork, GeometrySummary, Trial,
                      comparison_counts, geometry_summary, k_vector,
                      load_network, network_from_dict, network_from_k_vector,
                      network_to_dict, treatment_label)
from .planner import (PlanCandidate, enumerate_plans, evaluate_plans,
                      extend_network)
from .quality import (AggregateReport, ReplicationResult, TruthSummary,
                      aggregate, replication_result, true_rank_probabilities)
from .ranks import (RankProbabilityMatrix, SucraVector, cumulative_ranks,
                    rank_indicator, rank_probabilities, sucra)
from .rng import RandomSource, substream_seed
from .sampler import (ChainConfig, ChainError, NetworkMetaAnalysis,
                      PosteriorSamples, contrast_samples, dump_samples,
                      run_chain)
from .validation import InputError

__version__ = "0.1.0"

__all__ = [
    "AggregateReport", "ChainConfig", "ChainError", "Dataset", "DgmKind",
    "EvidenceNetwork", "ExperimentConfig", "ExperimentRecord",
    "GeometrySummary", "InputError", "LatentState", "ModelParams",
    "NetworkMetaAnalysis", "PlanCandidate", "PosteriorSamples",
    "RandomSource", "RankProbabilityMatrix", "ReplicationResult",
    "SucraVector", "SuiteResult", "Trial", "TrialEffects", "TruthSummary",
    "absolute_effect", "aggregate", "baseline_probability",
    "comparison_counts", "contrast_samples", "cumulative_ranks",
    "derive_seed", "dump_samples", "enumerate_plans", "evaluate_plans",
    "extend_network", "generate_dataset", "geometry_summary", "k_vector",
    "load_experiment_record", "load_network", "log_likelihood", "log_prior",
    "network_from_dict", "network_from_k_vector", "network_to_dict",
    "rank_indicator", "rank_probabilities", "records_equivalent",
    "replication_result", "run_chain", "run_experiment", "run_suite",
    "sample_relative_effects", "sigma_inverse", "substream_seed", "sucra",
    "treatment_label", "true_rank_probabilities", "write_experiment_outputs",
]
