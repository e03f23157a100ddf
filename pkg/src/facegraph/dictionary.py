"""Per-entity sample sets and the cleansed identification dictionary.

Web-crawled sample images for a person are noisy: other people, crowd
shots, the occasional lookalike. Before an entity earns a dictionary
entry, its gathered faces are cleansed by similarity to a target vector,
either the mean of all gathered faces or one hand-picked reference face,
and only faces at or above the filter threshold survive. The dictionary
entry is then the renormalized mean of the survivors.

Filtering quality is measured against annotated sample sets with
precision, recall, and F1 over the kept faces.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .defaults import DEFAULT_IMAGES_PER_ENTITY, DEFAULT_SAMPLE_FILTER_THRESHOLD
from .embedding import FaceEmbedding, cosine_similarity, mean_embedding, normalize
from .entities import EntityRecord
from .errors import (
    ConfigError,
    DecodeError,
    DimensionError,
    EmptyDictionaryError,
    EmptySampleSetError,
    EmptySetError,
    MissingReferenceError,
    NotFoundError,
)
from .ingestion import DetectionProviderLike

__all__ = [
    "SampleFace",
    "SampleSet",
    "FilterReport",
    "FilterMetrics",
    "DictionaryEntry",
    "EntityDictionary",
    "STRATEGIES",
    "gather_samples",
    "select_target",
    "filter_features",
    "evaluate_filtering",
    "build_dictionary",
    "set_reference",
]

log = logging.getLogger(__name__)

STRATEGIES = ("mean", "reference")


@dataclass(frozen=True)
class SampleFace:
    """One gathered face: embedding plus its source, optionally annotated."""

    face_id: str
    entity_id: str
    embedding: FaceEmbedding
    source_image: str
    ground_truth: bool | None = None


@dataclass(frozen=True)
class SampleSet:
    """All faces gathered for one entity, with an optional reference face."""

    entity_id: str
    faces: tuple[SampleFace, ...]
    reference_face_id: str | None = None
    display_name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "faces", tuple(self.faces))
        ids = [f.face_id for f in self.faces]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise NotFoundError(f"duplicate face ids in sample set: {dupes}")
        if self.reference_face_id is not None and self.reference_face_id not in ids:
            raise NotFoundError(
                f"reference face {self.reference_face_id!r} is not in the sample set"
            )

    def face(self, face_id: str) -> SampleFace:
        for f in self.faces:
            if f.face_id == face_id:
                return f
        raise NotFoundError(f"no face {face_id!r} in sample set {self.entity_id}")


@dataclass(frozen=True)
class FilterReport:
    """Outcome of cleansing one sample set at one threshold."""

    entity_id: str
    strategy: str
    threshold: float
    kept: tuple[str, ...]
    removed: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "strategy": self.strategy,
            "threshold": self.threshold,
            "kept": list(self.kept),
            "removed": list(self.removed),
        }


@dataclass(frozen=True)
class FilterMetrics:
    """Precision/recall/F1 of kept faces against annotations.

    ``degenerate`` flags metrics whose denominator was empty (nothing
    kept, or no true faces annotated); those are reported as 1.0.
    """

    precision: float
    recall: float
    f1: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class DictionaryEntry:
    """One identifiable person: display name and aggregate face vector."""

    entity_id: str
    display_name: str
    vector: FaceEmbedding
    sample_count: int

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise ConfigError(
                f"dictionary entry {self.entity_id} has sample_count {self.sample_count}"
            )


@dataclass
class EntityDictionary:
    """The cleansed identification dictionary, ordered by entity id."""

    entries: dict[str, DictionaryEntry]
    embedding_dim: int

    def __post_init__(self) -> None:
        if not self.entries:
            raise EmptyDictionaryError("dictionary has no entries")
        for entry in self.entries.values():
            if entry.vector.dim != self.embedding_dim:
                raise DimensionError(
                    f"entry {entry.entity_id} has dim {entry.vector.dim}, "
                    f"dictionary says {self.embedding_dim}"
                )
        self.entries = {k: self.entries[k] for k in sorted(self.entries)}
        self._ids: tuple[str, ...] = tuple(self.entries)
        self._matrix: np.ndarray | None = None

    def ids(self) -> tuple[str, ...]:
        return self._ids

    def matrix(self) -> np.ndarray:
        """Entry vectors stacked in ascending entity-id order."""
        if self._matrix is None:
            self._matrix = np.stack(
                [self.entries[i].vector.values for i in self._ids]
            )
        return self._matrix

    def __len__(self) -> int:
        return len(self.entries)


def gather_samples(
    entity: EntityRecord,
    images: Iterable[tuple[str, str]],
    detector: DetectionProviderLike,
    max_images: int = DEFAULT_IMAGES_PER_ENTITY,
) -> SampleSet:
    """Gather a sample set for one entity from an image source.

    Consumes at most ``max_images`` images from the source (failed images
    count against the budget) and records every face the detector finds.
    Face ids are ``{entity_id}:{image name}#{face index}``; the order of
    the source fixes the order of the set.

    Args:
        entity: who the samples are for.
        images: ``(name, locator)`` pairs, e.g. ``DirectoryImages``.
        detector: detection/embedding provider.
        max_images: image budget.

    Raises:
        EmptySampleSetError: not a single face came out of the budget.
        ConfigError: non-positive ``max_images``.
    """
    if max_images < 1:
        raise ConfigError(f"max_images must be positive, got {max_images}")
    faces: list[SampleFace] = []
    consumed = 0
    for name, locator in images:
        if consumed >= max_images:
            break
        consumed += 1
        try:
            detections = detector.detect(locator)
        except DecodeError as exc:
            log.warning("gather %s: skipping %s: %s", entity.entity_id, name, exc)
            continue
        for index, (_box, vector) in enumerate(detections):
            faces.append(
                SampleFace(
                    face_id=f"{entity.entity_id}:{name}#{index}",
                    entity_id=entity.entity_id,
                    embedding=normalize(vector),
                    source_image=name,
                )
            )
    if not faces:
        raise EmptySampleSetError(
            f"no faces gathered for {entity.entity_id} from {consumed} images"
        )
    return SampleSet(
        entity_id=entity.entity_id,
        faces=tuple(faces),
        display_name=entity.display_name,
    )


def select_target(sample_set: SampleSet, strategy: str) -> FaceEmbedding:
    """Pick the cleansing target vector for a sample set.

    ``mean`` averages every gathered face; ``reference`` uses the face
    named by ``reference_face_id``.

    Raises:
        ConfigError: unknown strategy.
        EmptySetError: the sample set has no faces.
        MissingReferenceError: reference strategy without a reference set.
    """
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if not sample_set.faces:
        raise EmptySetError(f"sample set {sample_set.entity_id} is empty")
    if strategy == "mean":
        return mean_embedding(f.embedding for f in sample_set.faces)
    if sample_set.reference_face_id is None:
        raise MissingReferenceError(
            f"sample set {sample_set.entity_id} has no reference face"
        )
    return sample_set.face(sample_set.reference_face_id).embedding


def filter_features(
    sample_set: SampleSet,
    target: FaceEmbedding,
    threshold: float = DEFAULT_SAMPLE_FILTER_THRESHOLD,
    strategy: str = "mean",
) -> FilterReport:
    """Partition a sample set by similarity to the target vector.

    A face is kept iff its cosine similarity to the target is at least
    the threshold. Under the reference strategy the reference face always
    survives: its self-similarity is 1.

    Args:
        sample_set: the set to cleanse.
        target: output of :func:`select_target`.
        threshold: keep-a-face similarity threshold.
        strategy: recorded in the report for later inspection.
    """
    if strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    kept, removed = [], []
    for face in sample_set.faces:
        if cosine_similarity(face.embedding, target) >= threshold:
            kept.append(face.face_id)
        else:
            removed.append(face.face_id)
    return FilterReport(
        entity_id=sample_set.entity_id,
        strategy=strategy,
        threshold=float(threshold),
        kept=tuple(kept),
        removed=tuple(removed),
    )


def evaluate_filtering(report: FilterReport, sample_set: SampleSet) -> FilterMetrics:
    """Score a filter report against the sample set's annotations.

    Precision is the fraction of kept faces that truly show the entity;
    recall is the fraction of true faces that were kept. Empty
    denominators report 1.0 with the ``degenerate`` flag raised.

    Raises:
        ValueError: a face has no ground-truth annotation, or the report
            does not exactly partition the sample set.
    """
    truth = {}
    for face in sample_set.faces:
        if face.ground_truth is None:
            raise ValueError(f"face {face.face_id} has no ground-truth annotation")
        truth[face.face_id] = face.ground_truth
    reported = set(report.kept) | set(report.removed)
    if reported != set(truth) or len(report.kept) + len(report.removed) != len(truth):
        raise ValueError("filter report does not partition the sample set")

    kept_true = sum(1 for fid in report.kept if truth[fid])
    total_true = sum(1 for is_true in truth.values() if is_true)

    degenerate = False
    if report.kept:
        precision = kept_true / len(report.kept)
    else:
        precision, degenerate = 1.0, True
    if total_true:
        recall = kept_true / total_true
    else:
        recall, degenerate = 1.0, True
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return FilterMetrics(precision, recall, f1, degenerate)


def build_dictionary(
    filtered_sets: Sequence[tuple[SampleSet, FilterReport]],
    names: Mapping[str, str] | None = None,
) -> tuple[EntityDictionary, list[str]]:
    """Aggregate cleansed sample sets into an identification dictionary.

    Each entity's vector is the renormalized mean of its kept faces.
    Entities whose kept set is empty are dropped and returned in the
    second element so callers can warn about them.

    Raises:
        EmptyDictionaryError: no sets given, or every set emptied out.
        DimensionError: sets disagree on embedding dimension.
    """
    if not filtered_sets:
        raise EmptyDictionaryError("no sample sets to build from")
    names = dict(names or {})
    entries: dict[str, DictionaryEntry] = {}
    dropped: list[str] = []
    dim: int | None = None
    for sample_set, report in filtered_sets:
        kept_ids = set(report.kept)
        kept = [f.embedding for f in sample_set.faces if f.face_id in kept_ids]
        if not kept:
            dropped.append(sample_set.entity_id)
            log.warning(
                "entity %s lost every face to filtering; dropped from dictionary",
                sample_set.entity_id,
            )
            continue
        if dim is None:
            dim = kept[0].dim
        entries[sample_set.entity_id] = DictionaryEntry(
            entity_id=sample_set.entity_id,
            display_name=names.get(sample_set.entity_id, sample_set.display_name)
            or sample_set.entity_id,
            vector=mean_embedding(kept),
            sample_count=len(kept),
        )
    if not entries:
        raise EmptyDictionaryError("every sample set emptied out under filtering")
    assert dim is not None
    return EntityDictionary(entries=entries, embedding_dim=dim), dropped


def set_reference(sample_set: SampleSet, face_id: str) -> SampleSet:
    """Return a copy of the sample set with its reference face set.

    Idempotent: setting the same face twice yields an equal set.

    Raises:
        NotFoundError: the face id is not in the set.
    """
    sample_set.face(face_id)  # raises NotFoundError for unknown ids
    return dataclasses.replace(sample_set, reference_face_id=face_id)
