"""Compare two sets of text samples through their embedding distributions.

The headline measure quantizes jointly-clustered embeddings into a pair
of histograms, traces the exponentiated-KL divergence curve between
them over all mixtures, and reports the area under that curve: 1 when
the two sample sets are indistinguishable, falling toward 0 as they
drift apart.  Supporting modules provide classical corpus statistics,
the Gaussian Fréchet baseline, Bradley-Terry preference fitting, file
formats and a CLI.
"""

__version__ = "0.1.0"

from .divergence import as_distribution, js, kl, mixture
from .errors import (
    ConsistencyError,
    DataFormatError,
    DegenerateDataError,
    DimensionError,
    Error,
    ParameterError,
)
from .formats import (
    ReportDocument,
    read_embeddings,
    read_logprob_csv,
    read_ratings_csv,
    read_report,
    read_token_corpus,
    renormalize,
    write_curve_csv,
    write_curve_svg,
    write_embeddings,
    write_report,
    write_token_corpus,
)
from .frontier import (
    DivergenceCurve,
    MauveReport,
    SweepResult,
    divergence_curve,
    frechet_distance,
    mauve,
    mauve_from_curve,
    scaling_sweep,
)
from .quantize import (
    Assignment,
    ClusterModel,
    EmbeddingSet,
    histogram,
    kmeans,
    pca_reduce,
    quantize_pair,
)
from .ranking import (
    BtScores,
    PreferenceDataset,
    bt_fit,
    bt_win_prob,
    preprocess_ratings,
    spearman,
)
from .textstats import (
    LogProbRecord,
    TokenCorpus,
    distinct_n,
    gen_ppl_gap,
    nucleus_truncate,
    perplexity,
    repetition_frequency,
    self_bleu,
    zipf_coefficient,
)

__all__ = [
    "__version__",
    "as_distribution",
    "mixture",
    "kl",
    "js",
    "Error",
    "ParameterError",
    "DimensionError",
    "DataFormatError",
    "DegenerateDataError",
    "ConsistencyError",
    "EmbeddingSet",
    "ClusterModel",
    "Assignment",
    "pca_reduce",
    "kmeans",
    "histogram",
    "quantize_pair",
    "DivergenceCurve",
    "MauveReport",
    "SweepResult",
    "divergence_curve",
    "mauve_from_curve",
    "mauve",
    "frechet_distance",
    "scaling_sweep",
    "TokenCorpus",
    "LogProbRecord",
    "zipf_coefficient",
    "repetition_frequency",
    "distinct_n",
    "self_bleu",
    "perplexity",
    "gen_ppl_gap",
    "nucleus_truncate",
    "PreferenceDataset",
    "BtScores",
    "bt_fit",
    "bt_win_prob",
    "preprocess_ratings",
    "spearman",
    "ReportDocument",
    "read_embeddings",
    "write_embeddings",
    "read_token_corpus",
    "write_token_corpus",
    "read_logprob_csv",
    "read_ratings_csv",
    "read_report",
    "write_report",
    "write_curve_csv",
    "write_curve_svg",
    "renormalize",
]
