"""Corpus ingestion: manifests, search constraints, and face extraction.

A corpus is described by a plain-text manifest, one image per line::

    url capture_timestamp mime content_digest locator

with 14-digit ``YYYYMMDDhhmmss`` capture timestamps. Records pass through
a search space (domain, format, capture-date window), duplicates collapse
by content digest, and each surviving image goes to a detection provider
that yields the faces it contains.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Protocol, Sequence
from urllib.parse import urlsplit

from .defaults import DEFAULT_IMAGE_FORMATS
from .embedding import FaceEmbedding, normalize
from .errors import ConfigError, DecodeError, NormalizationError
from .providers import Detection

__all__ = [
    "ImageRecord",
    "RejectedLine",
    "ParsedManifest",
    "SearchSpace",
    "FaceObservation",
    "CorpusExtraction",
    "DetectionProviderLike",
    "parse_manifest",
    "apply_constraints",
    "dedupe",
    "detect_and_embed",
    "embed_corpus",
    "year_range",
    "mime_type_for",
]

log = logging.getLogger(__name__)

TIMESTAMP_LENGTH = 14

_MIME_BY_NAME = {
    "jpg": "image/jpeg",
    "jpeg": "image/jpeg",
    "png": "image/png",
    "gif": "image/gif",
}


class DetectionProviderLike(Protocol):
    def detect(self, locator: str) -> list[Detection]: ...


def _valid_timestamp(value: str) -> bool:
    if len(value) != TIMESTAMP_LENGTH or not value.isdigit():
        return False
    try:
        datetime.strptime(value, "%Y%m%d%H%M%S")
    except ValueError:
        return False
    return True


def _domain_of(url: str) -> str | None:
    host = urlsplit(url).hostname
    if not host:
        return None
    return host[4:] if host.startswith("www.") else host


@dataclass(frozen=True)
class ImageRecord:
    """One archived image: where it lives and when it was captured."""

    url: str
    domain: str
    capture_timestamp: str
    mime: str
    content_digest: str
    locator: str

    @classmethod
    def from_fields(
        cls, url: str, capture_timestamp: str, mime: str, content_digest: str, locator: str
    ) -> "ImageRecord":
        """Build a record, deriving the domain from the URL host.

        Raises:
            ValueError: bad timestamp or a URL without a host.
        """
        if not _valid_timestamp(capture_timestamp):
            raise ValueError(f"bad timestamp {capture_timestamp!r}")
        domain = _domain_of(url)
        if domain is None:
            raise ValueError(f"URL has no host: {url!r}")
        return cls(url, domain, capture_timestamp, mime, content_digest, locator)


@dataclass(frozen=True)
class RejectedLine:
    """A manifest line the parser refused, and why."""

    line_number: int
    line: str
    reason: str


@dataclass
class ParsedManifest:
    records: list[ImageRecord]
    rejects: list[RejectedLine]


def parse_manifest(path: str | Path) -> ParsedManifest:
    """Parse a corpus manifest file.

    Malformed lines land in ``rejects`` with a reason instead of aborting
    the run; blank lines are ignored.

    Raises:
        OSError: if the file cannot be read at all.
    """
    records: list[ImageRecord] = []
    rejects: list[RejectedLine] = []
    text = Path(path).read_text()
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split(maxsplit=4)
        if len(parts) != 5:
            rejects.append(RejectedLine(line_number, line, "field count"))
            continue
        url, timestamp, mime, digest, locator = parts
        if not _valid_timestamp(timestamp):
            rejects.append(RejectedLine(line_number, line, "bad timestamp"))
            continue
        if _domain_of(url) is None:
            rejects.append(RejectedLine(line_number, line, "bad url"))
            continue
        records.append(ImageRecord.from_fields(url, timestamp, mime, digest, locator))
    return ParsedManifest(records, rejects)


def year_range(year: int) -> tuple[str, str]:
    """Whole-year capture window: Jan 1 00:00:00 through Dec 31 23:59:59."""
    if year < 1 or year > 9999:
        raise ConfigError(f"year out of range: {year}")
    return (f"{year:04d}0101000000", f"{year:04d}1231235959")


def mime_type_for(name: str) -> str:
    """Map a format name like ``jpeg`` or ``png`` to its MIME type."""
    mime = _MIME_BY_NAME.get(name.lower().strip())
    if mime is None:
        if "/" in name:
            return name
        raise ConfigError(f"unknown image format {name!r}")
    return mime


@dataclass(frozen=True)
class SearchSpace:
    """Conjunction of domain, format, and capture-date constraints.

    A record is admitted only when its domain matches one of
    ``allowed_domains`` (exactly, or as a subdomain of one), its MIME type
    is allowed, and its capture timestamp falls inside ``date_range``
    (inclusive on both ends). The default formats exclude ``image/gif``
    on purpose.
    """

    allowed_domains: frozenset[str]
    date_range: tuple[str, str]
    allowed_formats: frozenset[str] = DEFAULT_IMAGE_FORMATS

    def __post_init__(self) -> None:
        start, end = self.date_range
        if not _valid_timestamp(start) or not _valid_timestamp(end):
            raise ConfigError(f"date_range bounds must be 14-digit timestamps: {self.date_range}")
        if start > end:
            raise ConfigError(f"date_range starts after it ends: {self.date_range}")
        if not self.allowed_domains:
            raise ConfigError("allowed_domains must not be empty")
        object.__setattr__(self, "allowed_domains", frozenset(self.allowed_domains))
        object.__setattr__(self, "allowed_formats", frozenset(self.allowed_formats))

    @classmethod
    def for_year(
        cls,
        domains: Iterable[str],
        year: int,
        formats: Iterable[str] = DEFAULT_IMAGE_FORMATS,
    ) -> "SearchSpace":
        return cls(frozenset(domains), year_range(year), frozenset(formats))

    def _domain_ok(self, domain: str) -> bool:
        return any(
            domain == allowed or domain.endswith("." + allowed)
            for allowed in self.allowed_domains
        )

    def admits(self, record: ImageRecord) -> bool:
        start, end = self.date_range
        return (
            self._domain_ok(record.domain)
            and record.mime in self.allowed_formats
            and start <= record.capture_timestamp <= end
        )


def apply_constraints(records: Iterable[ImageRecord], space: SearchSpace) -> list[ImageRecord]:
    """Order-preserving filter of the records the search space admits."""
    return [r for r in records if space.admits(r)]


def dedupe(records: Sequence[ImageRecord]) -> list[ImageRecord]:
    """Collapse records sharing a content digest.

    The earliest capture wins; on equal timestamps the first occurrence
    wins. Output keeps the original relative order of the winners.
    """
    best: dict[str, tuple[int, ImageRecord]] = {}
    for position, record in enumerate(records):
        digest = record.content_digest
        if digest not in best:
            best[digest] = (position, record)
        else:
            _, current = best[digest]
            if record.capture_timestamp < current.capture_timestamp:
                best[digest] = (best[digest][0], record)
    winners = sorted(best.values(), key=lambda item: item[0])
    return [record for _, record in winners]


@dataclass(frozen=True)
class FaceObservation:
    """One face found in one archived image."""

    image: ImageRecord
    face_index: int
    bounding_box: tuple[float, float, float, float]
    embedding: FaceEmbedding

    def observation_id(self) -> str:
        return f"{self.image.url}@{self.image.capture_timestamp}#{self.face_index}"


def detect_and_embed(
    record: ImageRecord, provider: DetectionProviderLike
) -> list[FaceObservation]:
    """Run the detection provider on one image.

    An image with no faces yields an empty list; that is a result, not an
    error.

    Raises:
        DecodeError: the provider could not decode the image, or returned
            a malformed detection (bad box, zero embedding).
    """
    observations = []
    for index, (box, vector) in enumerate(provider.detect(record.locator)):
        try:
            embedding = normalize(vector)
        except NormalizationError as exc:
            raise DecodeError(
                f"{record.locator}: provider returned a degenerate embedding: {exc}"
            ) from exc
        observations.append(
            FaceObservation(
                image=record,
                face_index=index,
                bounding_box=box,
                embedding=embedding,
            )
        )
    return observations


@dataclass
class CorpusExtraction:
    """Everything a corpus-wide detection run produced."""

    observations: list[FaceObservation]
    failures: list[tuple[ImageRecord, str]] = field(default_factory=list)


def embed_corpus(
    records: Sequence[ImageRecord],
    provider: DetectionProviderLike,
    max_workers: int = 1,
) -> CorpusExtraction:
    """Detect faces across a whole corpus with a bounded worker pool.

    Results are keyed by input position and reassembled in input order, so
    worker scheduling never changes the output. Images the provider fails
    on are recorded in ``failures`` and skipped.

    Args:
        records: images to process, already constrained and deduplicated.
        provider: detection provider; must be safe to call from
            ``max_workers`` threads when ``max_workers > 1``.
        max_workers: pool size; 1 processes sequentially.
    """
    if max_workers < 1:
        raise ConfigError(f"max_workers must be positive, got {max_workers}")

    def run_one(record: ImageRecord):
        return detect_and_embed(record, provider)

    results: dict[int, list[FaceObservation]] = {}
    failures: dict[int, tuple[ImageRecord, str]] = {}
    if max_workers == 1:
        for i, record in enumerate(records):
            try:
                results[i] = run_one(record)
            except DecodeError as exc:
                failures[i] = (record, str(exc))
                log.warning("skipping %s: %s", record.locator, exc)
    else:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {i: pool.submit(run_one, r) for i, r in enumerate(records)}
            for i, future in futures.items():
                try:
                    results[i] = future.result()
                except DecodeError as exc:
                    failures[i] = (records[i], str(exc))
                    log.warning("skipping %s: %s", records[i].locator, exc)

    observations = [obs for i in sorted(results) for obs in results[i]]
    return CorpusExtraction(
        observations=observations,
        failures=[failures[i] for i in sorted(failures)],
    )
