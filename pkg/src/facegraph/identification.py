"""Identify dictionary persons in a stream of face observations.

Each face is matched to the dictionary entry with the highest cosine
similarity, and accepted only when that similarity reaches the
identification threshold. Results aggregate per image: an entity counts
once per image no matter how many of its faces appear, and faces that
match nobody are tallied as unmatched.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .defaults import DEFAULT_IDENTIFICATION_THRESHOLD
from .dictionary import EntityDictionary
from .embedding import FaceEmbedding
from .errors import DimensionError, EmptyDictionaryError
from .ingestion import FaceObservation, ImageRecord

__all__ = [
    "IdentificationResult",
    "identify_face",
    "identify_corpus",
]


@dataclass(frozen=True)
class IdentificationResult:
    """Who was recognized in one image.

    ``recognized`` holds ``(entity_id, best_similarity)`` pairs sorted by
    entity id, one per entity at most; ``best_similarity`` is the highest
    similarity any face in the image reached for that entity.
    """

    url: str
    timestamp: str
    recognized: tuple[tuple[str, float], ...]
    unmatched_face_count: int

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "timestamp": self.timestamp,
            "entities": [[eid, sim] for eid, sim in self.recognized],
            "unmatched_count": self.unmatched_face_count,
        }


def identify_face(
    embedding: FaceEmbedding,
    dictionary: EntityDictionary,
    threshold: float = DEFAULT_IDENTIFICATION_THRESHOLD,
) -> tuple[str, float] | None:
    """Match one face against the dictionary.

    Returns the best-scoring entity and its similarity, or ``None`` when
    even the best score stays below the threshold. Exact similarity ties
    resolve to the ascending-first entity id.

    Raises:
        EmptyDictionaryError: the dictionary has no entries.
        DimensionError: face and dictionary dimensions disagree.
    """
    if len(dictionary) == 0:
        raise EmptyDictionaryError("cannot identify against an empty dictionary")
    if embedding.dim != dictionary.embedding_dim:
        raise DimensionError(
            f"face has dim {embedding.dim}, dictionary {dictionary.embedding_dim}"
        )
    # clamp before argmax: raw products can exceed 1.0 by float noise,
    # which would otherwise break the ascending-id tie rule
    similarities = np.clip(dictionary.matrix() @ embedding.values, -1.0, 1.0)
    best = int(np.argmax(similarities))  # first max: ids are sorted ascending
    similarity = float(similarities[best])
    if similarity < threshold:
        return None
    return dictionary.ids()[best], similarity


def identify_corpus(
    observations: Iterable[FaceObservation],
    dictionary: EntityDictionary,
    threshold: float = DEFAULT_IDENTIFICATION_THRESHOLD,
    images: Sequence[ImageRecord] | None = None,
) -> list[IdentificationResult]:
    """Identify every observed face and aggregate the matches per image.

    Args:
        observations: faces found in the corpus, any order.
        dictionary: cleansed identification dictionary.
        threshold: accept-a-match similarity threshold.
        images: optional roster of images that were processed; images
            with no observations then still produce an (empty) result.

    Returns:
        One result per image, sorted by (url, timestamp); within a
        result, entities sorted by id. Output is independent of the
        order of ``observations``.

    Raises:
        EmptyDictionaryError: the dictionary has no entries.
    """
    if len(dictionary) == 0:
        raise EmptyDictionaryError("cannot identify against an empty dictionary")

    keys: dict[tuple[str, str], dict] = {}

    def slot(url: str, timestamp: str) -> dict:
        return keys.setdefault(
            (url, timestamp), {"best": {}, "unmatched": 0}
        )

    if images is not None:
        for record in images:
            slot(record.url, record.capture_timestamp)

    for obs in observations:
        image_slot = slot(obs.image.url, obs.image.capture_timestamp)
        match = identify_face(obs.embedding, dictionary, threshold)
        if match is None:
            image_slot["unmatched"] += 1
        else:
            entity_id, similarity = match
            previous = image_slot["best"].get(entity_id)
            if previous is None or similarity > previous:
                image_slot["best"][entity_id] = similarity

    results = []
    for (url, timestamp), data in sorted(keys.items()):
        recognized = tuple(sorted(data["best"].items()))
        results.append(
            IdentificationResult(
                url=url,
                timestamp=timestamp,
                recognized=recognized,
                unmatched_face_count=data["unmatched"],
            )
        )
    return results
