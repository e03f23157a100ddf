"""File formats shared by the CLI, the workspace, and the HTTP service.

Everything is line-delimited JSON with sorted keys and compact
separators, so the same data always serializes to the same bytes.
Files that need context to interpret (embedding manifests, sample
manifests, dictionaries) start with a header line carrying a ``kind``
tag; plain record streams (pairs, results) do not.

All writers go through :func:`atomic_write`: the payload lands in a
temp file in the target directory and is renamed into place, so readers
never observe a half-written file.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping

from .calibration import VerificationPair
from .dictionary import DictionaryEntry, EntityDictionary, SampleFace, SampleSet
from .embedding import FaceEmbedding
from .errors import (
    ConfigError,
    NormalizationError,
    NotFoundError,
    ParseError,
)
from .identification import IdentificationResult

__all__ = [
    "DICTIONARY_VERSION",
    "atomic_write",
    "write_embeddings",
    "read_embeddings",
    "write_pairs",
    "read_pairs",
    "resolve_pairs",
    "write_samples",
    "read_samples",
    "write_dictionary",
    "read_dictionary",
    "write_results",
    "read_results",
    "write_filter_report",
    "read_annotations",
]

DICTIONARY_VERSION = 1


def _dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def atomic_write(path: str | Path, data: bytes) -> None:
    """Write ``data`` to ``path`` via a temp file and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    data = "".join(_dumps(row) + "\n" for row in rows).encode("utf-8")
    atomic_write(path, data)


def _read_jsonl(path: str | Path) -> list[dict]:
    rows: list[dict] = []
    with open(path, "r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{number}: not valid JSON: {exc.msg}") from exc
            if not isinstance(row, dict):
                raise ParseError(f"{path}:{number}: expected an object")
            rows.append(row)
    return rows


def _header(path: str | Path, rows: list[dict], kind: str) -> dict:
    if not rows or rows[0].get("kind") != kind:
        raise ParseError(f"{path}: missing {kind!r} header line")
    return rows[0]


def _vector(path: str | Path, row: dict, key: str, dim: int) -> FaceEmbedding:
    raw = row.get(key)
    if not isinstance(raw, list) or len(raw) != dim:
        raise ParseError(f"{path}: field {key!r} is not a length-{dim} array")
    try:
        return FaceEmbedding(raw)
    except NormalizationError as exc:
        raise ParseError(f"{path}: stored vector is not unit length: {exc}") from exc


# --- embedding manifests -------------------------------------------------


def write_embeddings(
    path: str | Path,
    embeddings: Mapping[str, FaceEmbedding],
    embedding_dim: int | None = None,
) -> None:
    """Write an embedding manifest: a dim header, then one row per id."""
    items = sorted(embeddings.items())
    if embedding_dim is None:
        if not items:
            raise ConfigError("embedding_dim is required for an empty manifest")
        embedding_dim = items[0][1].dim
    rows: list[dict] = [{"kind": "embeddings", "embedding_dim": embedding_dim}]
    for key, emb in items:
        if emb.dim != embedding_dim:
            raise ConfigError(
                f"embedding {key!r} has dim {emb.dim}, manifest says {embedding_dim}"
            )
        rows.append({"id": key, "embedding": [float(x) for x in emb.values]})
    _write_jsonl(path, rows)


def read_embeddings(path: str | Path) -> dict[str, FaceEmbedding]:
    rows = _read_jsonl(path)
    header = _header(path, rows, "embeddings")
    dim = header.get("embedding_dim")
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{path}: bad embedding_dim in header")
    out: dict[str, FaceEmbedding] = {}
    for row in rows[1:]:
        key = row.get("id")
        if not isinstance(key, str) or not key:
            raise ParseError(f"{path}: embedding row without an id")
        if key in out:
            raise ParseError(f"{path}: duplicate embedding id {key!r}")
        out[key] = _vector(path, row, "embedding", dim)
    return out


# --- verification pairs ---------------------------------------------------


def write_pairs(path: str | Path, rows: Iterable[tuple[str, str, bool]]) -> None:
    _write_jsonl(
        path,
        (
            {"id_a": a, "id_b": b, "same_person": bool(same)}
            for a, b, same in rows
        ),
    )


def read_pairs(path: str | Path) -> list[tuple[str, str, bool]]:
    out = []
    for row in _read_jsonl(path):
        try:
            a, b, same = row["id_a"], row["id_b"], row["same_person"]
        except KeyError as exc:
            raise ParseError(f"{path}: pair row missing field {exc}") from exc
        if not isinstance(same, bool):
            raise ParseError(f"{path}: same_person must be a boolean")
        out.append((str(a), str(b), same))
    return out


def resolve_pairs(
    rows: Iterable[tuple[str, str, bool]],
    embeddings: Mapping[str, FaceEmbedding],
) -> list[VerificationPair]:
    """Join pair rows against an embedding manifest."""
    pairs = []
    for a, b, same in rows:
        for key in (a, b):
            if key not in embeddings:
                raise NotFoundError(f"pair references unknown embedding id {key!r}")
        pairs.append(VerificationPair(embeddings[a], embeddings[b], same))
    return pairs


# --- sample manifests -----------------------------------------------------


def write_samples(path: str | Path, sample_set: SampleSet) -> None:
    if not sample_set.faces:
        raise ConfigError("refusing to write a sample manifest with no faces")
    dim = sample_set.faces[0].embedding.dim
    rows: list[dict] = [
        {
            "kind": "samples",
            "entity_id": sample_set.entity_id,
            "display_name": sample_set.display_name,
            "embedding_dim": dim,
            "reference_face_id": sample_set.reference_face_id,
        }
    ]
    for face in sample_set.faces:
        rows.append(
            {
                "face_id": face.face_id,
                "entity_id": face.entity_id,
                "embedding": [float(x) for x in face.embedding.values],
                "source_image": face.source_image,
                "ground_truth": face.ground_truth,
            }
        )
    _write_jsonl(path, rows)


def read_samples(path: str | Path) -> SampleSet:
    rows = _read_jsonl(path)
    header = _header(path, rows, "samples")
    entity_id = header.get("entity_id")
    dim = header.get("embedding_dim")
    if not isinstance(entity_id, str) or not entity_id:
        raise ParseError(f"{path}: bad entity_id in header")
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{path}: bad embedding_dim in header")
    faces = []
    for row in rows[1:]:
        if row.get("entity_id") != entity_id:
            raise ParseError(
                f"{path}: face row entity {row.get('entity_id')!r} does not match "
                f"manifest entity {entity_id!r}"
            )
        ground_truth = row.get("ground_truth")
        if ground_truth is not None and not isinstance(ground_truth, bool):
            raise ParseError(f"{path}: ground_truth must be true, false or null")
        faces.append(
            SampleFace(
                face_id=str(row.get("face_id", "")),
                entity_id=entity_id,
                embedding=_vector(path, row, "embedding", dim),
                source_image=str(row.get("source_image", "")),
                ground_truth=ground_truth,
            )
        )
    try:
        return SampleSet(
            entity_id=entity_id,
            faces=tuple(faces),
            reference_face_id=header.get("reference_face_id"),
            display_name=str(header.get("display_name", "")),
        )
    except NotFoundError as exc:
        raise ParseError(f"{path}: {exc}") from exc


# --- dictionaries ---------------------------------------------------------


def write_dictionary(
    path: str | Path,
    dictionary: EntityDictionary,
    *,
    sample_filter_threshold: float,
    strategy: str,
) -> None:
    """Persist a dictionary with the config it was built under."""
    rows: list[dict] = [
        {
            "kind": "dictionary",
            "version": DICTIONARY_VERSION,
            "embedding_dim": dictionary.embedding_dim,
            "lambda1": float(sample_filter_threshold),
            "strategy": strategy,
        }
    ]
    for entity_id in dictionary.ids():
        entry = dictionary.entries[entity_id]
        rows.append(
            {
                "entity_id": entry.entity_id,
                "display_name": entry.display_name,
                "vector": [float(x) for x in entry.vector.values],
                "sample_count": entry.sample_count,
            }
        )
    _write_jsonl(path, rows)


def read_dictionary(path: str | Path) -> tuple[EntityDictionary, dict]:
    """Load a dictionary plus the build config stored in its header."""
    rows = _read_jsonl(path)
    header = _header(path, rows, "dictionary")
    if header.get("version") != DICTIONARY_VERSION:
        raise ParseError(
            f"{path}: unsupported dictionary version {header.get('version')!r}"
        )
    dim = header.get("embedding_dim")
    if not isinstance(dim, int) or dim < 1:
        raise ParseError(f"{path}: bad embedding_dim in header")
    entries = {}
    for row in rows[1:]:
        entity_id = row.get("entity_id")
        if not isinstance(entity_id, str) or not entity_id:
            raise ParseError(f"{path}: dictionary row without an entity_id")
        if entity_id in entries:
            raise ParseError(f"{path}: duplicate dictionary entity {entity_id!r}")
        count = row.get("sample_count")
        if not isinstance(count, int) or count < 1:
            raise ParseError(f"{path}: bad sample_count for {entity_id!r}")
        entries[entity_id] = DictionaryEntry(
            entity_id=entity_id,
            display_name=str(row.get("display_name", "")),
            vector=_vector(path, row, "vector", dim),
            sample_count=count,
        )
    if not entries:
        raise ParseError(f"{path}: dictionary file holds no entries")
    config = {k: v for k, v in header.items() if k != "kind"}
    return EntityDictionary(entries=entries, embedding_dim=dim), config


# --- identification results ----------------------------------------------


def write_results(path: str | Path, results: Iterable[IdentificationResult]) -> None:
    _write_jsonl(path, (r.to_dict() for r in results))


def read_results(path: str | Path) -> list[IdentificationResult]:
    out = []
    for row in _read_jsonl(path):
        try:
            recognized = tuple((str(e), float(s)) for e, s in row["entities"])
            out.append(
                IdentificationResult(
                    url=str(row["url"]),
                    timestamp=str(row["timestamp"]),
                    recognized=recognized,
                    unmatched_face_count=int(row["unmatched_count"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: bad result row: {exc!r}") from exc
    return out


# --- filter reports and annotations ---------------------------------------


def write_filter_report(path: str | Path, report, metrics=None) -> None:
    """Write one filter run as a single JSON document."""
    payload = {
        "report": report.to_dict(),
        "metrics": metrics.to_dict() if metrics is not None else None,
    }
    atomic_write(path, (_dumps(payload) + "\n").encode("utf-8"))


def read_annotations(path: str | Path) -> dict[str, bool]:
    """Read a face_id → is-true-person JSON object."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON: {exc.msg}") from exc
    if not isinstance(payload, dict):
        raise ParseError(f"{path}: annotations must be a JSON object")
    out = {}
    for key, value in payload.items():
        if not isinstance(value, bool):
            raise ParseError(f"{path}: annotation for {key!r} must be a boolean")
        out[str(key)] = value
    return out
