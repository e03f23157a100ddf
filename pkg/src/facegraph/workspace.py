"""Workspace directory layout.

A workspace is a plain directory the CLI and the HTTP service share:

    <root>/
      samples/<entity_id>.jsonl   one sample manifest per entity
      dictionary.jsonl            the built dictionary, if any
      results.jsonl               the latest identification run, if any
      crops/<face>.png            face crop images for the curation UI

Crop files are written by whatever produced the samples; this module
only fixes the naming scheme so the service can serve them statically.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from . import formats
from .dictionary import EntityDictionary, SampleSet
from .errors import NotFoundError
from .identification import IdentificationResult

__all__ = ["EntitySummary", "Workspace", "safe_name"]

_SAFE = re.compile(r"[^A-Za-z0-9._-]")


def safe_name(raw: str) -> str:
    """Map an arbitrary id to a stable filesystem- and URL-safe name.

    Ids that are already safe pass through unchanged; anything else gets
    its unsafe characters replaced and a short digest of the original
    appended so distinct ids never collide.
    """
    cleaned = _SAFE.sub("-", raw)
    if cleaned == raw and raw:
        return raw
    digest = hashlib.blake2s(raw.encode("utf-8"), digest_size=4).hexdigest()
    return f"{cleaned or 'x'}-{digest}"


@dataclass(frozen=True)
class EntitySummary:
    entity_id: str
    display_name: str
    sample_count: int
    reference_set: bool

    def to_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "display_name": self.display_name,
            "sample_count": self.sample_count,
            "reference_set": self.reference_set,
        }


class Workspace:
    """Accessor for one workspace directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def samples_dir(self) -> Path:
        return self.root / "samples"

    @property
    def crops_dir(self) -> Path:
        return self.root / "crops"

    @property
    def dictionary_path(self) -> Path:
        return self.root / "dictionary.jsonl"

    @property
    def results_path(self) -> Path:
        return self.root / "results.jsonl"

    def exists(self) -> bool:
        return self.root.is_dir()

    def initialize(self) -> "Workspace":
        self.samples_dir.mkdir(parents=True, exist_ok=True)
        self.crops_dir.mkdir(parents=True, exist_ok=True)
        return self

    # --- samples ---

    def sample_path(self, entity_id: str) -> Path:
        return self.samples_dir / f"{safe_name(entity_id)}.jsonl"

    def save_samples(self, sample_set: SampleSet) -> Path:
        self.samples_dir.mkdir(parents=True, exist_ok=True)
        path = self.sample_path(sample_set.entity_id)
        formats.write_samples(path, sample_set)
        return path

    def load_samples(self, entity_id: str) -> SampleSet:
        path = self.sample_path(entity_id)
        if not path.is_file():
            raise NotFoundError(f"no samples stored for entity {entity_id!r}")
        return formats.read_samples(path)

    def list_entities(self) -> list[EntitySummary]:
        if not self.samples_dir.is_dir():
            return []
        summaries = []
        for path in sorted(self.samples_dir.glob("*.jsonl")):
            sample_set = formats.read_samples(path)
            summaries.append(
                EntitySummary(
                    entity_id=sample_set.entity_id,
                    display_name=sample_set.display_name,
                    sample_count=len(sample_set.faces),
                    reference_set=sample_set.reference_face_id is not None,
                )
            )
        summaries.sort(key=lambda s: s.entity_id)
        return summaries

    # --- dictionary ---

    def save_dictionary(
        self,
        dictionary: EntityDictionary,
        *,
        sample_filter_threshold: float,
        strategy: str,
    ) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        formats.write_dictionary(
            self.dictionary_path,
            dictionary,
            sample_filter_threshold=sample_filter_threshold,
            strategy=strategy,
        )
        return self.dictionary_path

    def load_dictionary(self) -> tuple[EntityDictionary, dict]:
        if not self.dictionary_path.is_file():
            raise NotFoundError("workspace has no dictionary file")
        return formats.read_dictionary(self.dictionary_path)

    # --- identification results ---

    def save_results(self, results: Iterable[IdentificationResult]) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        formats.write_results(self.results_path, results)
        return self.results_path

    def load_results(self) -> list[IdentificationResult]:
        if not self.results_path.is_file():
            raise NotFoundError("workspace has no results file")
        return formats.read_results(self.results_path)

    # --- crops ---

    def crop_filename(self, face_id: str) -> str:
        return f"{safe_name(face_id)}.png"

    def crop_path(self, face_id: str) -> Path:
        return self.crops_dir / self.crop_filename(face_id)

    def crop_url(self, face_id: str) -> str:
        return f"/crops/{self.crop_filename(face_id)}"
