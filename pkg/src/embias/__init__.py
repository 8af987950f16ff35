"""embias: train word embeddings from (optionally gender-scrubbed) corpora
and measure gender associations with the Word Embedding Association Test."""

__version__ = "0.1.0"

from .corpus import (
    CorpusManifest,
    ScrubRules,
    TokenRecord,
    build_raw_corpora,
    intersect_documents,
    lemmatize_corpus,
    load_scrub_rules,
    parse_tagger_output,
    tokenize,
    write_sentences,
)
from .embeddings import (
    EmbeddingMeta,
    EmbeddingSet,
    load_text_format,
    lookup_all,
    meta_from_filename,
    save_text_format,
)
from .errors import (
    DataError,
    EmbiasError,
    FormatError,
    MissingWordsError,
    NumericError,
)
from .report import (
    ReportRow,
    RunReport,
    build_report,
    render_markdown,
    render_svg,
    render_tsv,
)
from .stimuli import (
    BalancedDesign,
    LabeledWords,
    StimulusSpec,
    expand_balanced_design,
    load_stimuli,
)
from .trainer import (
    CbowEmbedder,
    TrainingConfig,
    TrainingRun,
    Vocabulary,
    build_vocab,
    cbow_step,
    fit_corpus,
    negative_sampling_distribution,
    subsample_keep_probability,
    train,
)
from .weat import (
    AggregateResult,
    PermutationOutcome,
    WeatInput,
    WeatLabels,
    WeatResult,
    aggregate,
    cosine_similarity,
    differential_association,
    effect_size,
    permutation_test,
    run_weat,
    test_statistic,
)

__all__ = [
    "__version__",
    "AggregateResult",
    "BalancedDesign",
    "CbowEmbedder",
    "CorpusManifest",
    "DataError",
    "EmbeddingMeta",
    "EmbeddingSet",
    "EmbiasError",
    "FormatError",
    "LabeledWords",
    "MissingWordsError",
    "NumericError",
    "PermutationOutcome",
    "ReportRow",
    "RunReport",
    "ScrubRules",
    "StimulusSpec",
    "TokenRecord",
    "TrainingConfig",
    "TrainingRun",
    "Vocabulary",
    "WeatInput",
    "WeatLabels",
    "WeatResult",
    "aggregate",
    "build_raw_corpora",
    "build_report",
    "build_vocab",
    "cbow_step",
    "cosine_similarity",
    "differential_association",
    "effect_size",
    "expand_balanced_design",
    "fit_corpus",
    "intersect_documents",
    "lemmatize_corpus",
    "load_scrub_rules",
    "load_stimuli",
    "load_text_format",
    "lookup_all",
    "meta_from_filename",
    "negative_sampling_distribution",
    "parse_tagger_output",
    "permutation_test",
    "render_markdown",
    "render_svg",
    "render_tsv",
    "run_weat",
    "save_text_format",
    "subsample_keep_probability",
    "test_statistic",
    "tokenize",
    "train",
    "write_sentences",
]
