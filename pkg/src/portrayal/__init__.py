"""Toolkit for measuring how two groups of people are portrayed in a
diachronic n-gram corpus.

The pipeline filters person-name-anchored context out of 5-gram shards,
learns one contrastive group vector per (decade, group) against pre-trained
aligned word vectors, and analyzes the vectors through decade correlation
with transition significance tests, semantic-axis projection, and
time-adjusted lexicon toxicity rates.
"""

__version__ = "0.1.0"

from .context import ContextTable, compute_stats, merge, relative_frequency
from .diachronic import correlation_matrix, ks_two_sample, pearson, transition_report
from .ngrams import (
    CleaningRules,
    DecadeRange,
    bucket_by_decade,
    clean_token,
    default_cleaning_rules,
    parse_ngram_line,
    scan_corpus,
)
from .roster import GroupMap, Person, Roster, build_index, parse_roster_export
from .semaxes import SemanticAxis, axis_difference, axis_vector, load_axes, top_axes
from .spaces import EmbeddingSpace, cosine, load_space, mean_vector
from .synth import PlantSpec, generate_bundle, oracle_distribution
from .toxicity import ToxicLexicon, adjust_lexicon, load_lexicon, toxicity_rate
from .training import (
    GroupVector,
    GroupVectorTrainer,
    SampleSet,
    TrainerConfig,
    build_distribution,
    draw_samples,
    loss_gradient,
    ranking_loss,
    train_decade,
    train_group_vector,
)

__all__ = [
    "__version__",
    "ContextTable",
    "merge",
    "relative_frequency",
    "compute_stats",
    "correlation_matrix",
    "ks_two_sample",
    "pearson",
    "transition_report",
    "CleaningRules",
    "DecadeRange",
    "bucket_by_decade",
    "clean_token",
    "default_cleaning_rules",
    "parse_ngram_line",
    "scan_corpus",
    "GroupMap",
    "Person",
    "Roster",
    "build_index",
    "parse_roster_export",
    "SemanticAxis",
    "axis_difference",
    "axis_vector",
    "load_axes",
    "top_axes",
    "EmbeddingSpace",
    "cosine",
    "load_space",
    "mean_vector",
    "PlantSpec",
    "generate_bundle",
    "oracle_distribution",
    "ToxicLexicon",
    "adjust_lexicon",
    "load_lexicon",
    "toxicity_rate",
    "GroupVector",
    "GroupVectorTrainer",
    "SampleSet",
    "TrainerConfig",
    "build_distribution",
    "draw_samples",
    "loss_gradient",
    "ranking_loss",
    "train_decade",
    "train_group_vector",
]
