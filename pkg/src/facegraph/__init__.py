"""Face dictionaries, threshold calibration, archive-scale identification,
and co-occurrence graphs over image corpora."""

from __future__ import annotations

from .calibration import (
    CalibrationResult,
    VerificationPair,
    best_threshold,
    evaluate_threshold,
    kfold_calibrate,
    verify,
)
from .cooccurrence import (
    GRAPH_FORMATS,
    GraphEdge,
    GraphNode,
    OccurrenceCounts,
    RelationGraph,
    build_graph,
    count_occurrences,
    export_graph,
    merge_counts,
    parse_graph_json,
)
from .dictionary import (
    DictionaryEntry,
    EntityDictionary,
    FilterMetrics,
    FilterReport,
    SampleFace,
    SampleSet,
    build_dictionary,
    evaluate_filtering,
    filter_features,
    select_target,
    set_reference,
)
from .embedding import (
    FaceEmbedding,
    ProbabilityDistribution,
    ToyRepresentationModel,
    cosine_similarity,
    cross_entropy,
    extract_features,
    mean_embedding,
    normalize,
    train_toy_representation,
)
from .entities import EntityRecord, fetch_entities, rank_and_truncate
from .errors import (
    ConfigError,
    DecodeError,
    DimensionError,
    EmptyDictionaryError,
    EmptySampleSetError,
    EmptySetError,
    FacegraphError,
    MissingReferenceError,
    NormalizationError,
    NotFoundError,
    ParseError,
    SourceUnavailableError,
)
from .identification import IdentificationResult, identify_corpus, identify_face
from .ingestion import (
    FaceObservation,
    ImageRecord,
    SearchSpace,
    apply_constraints,
    dedupe,
    embed_corpus,
    mime_type_for,
    parse_manifest,
)
from .service import create_app
from .workspace import EntitySummary, Workspace

__version__ = "0.1.0"
