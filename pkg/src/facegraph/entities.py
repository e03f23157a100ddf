"""Entity listing from a SPARQL knowledge base, with recorded fixtures.

Dictionaries are seeded from a knowledge-base query: people of a given
occupation, born after a cutoff year, ranked by how often their
encyclopedia article was viewed in a chosen year. The query text lives in
a JSON config file so occupations, language edition, and the page-view
predicate can be swapped without touching code; the statistics predicate
in the shipped template must be adapted to whatever statistics service the
deployment actually has.

``fetch_entities`` accepts either an HTTP(S) endpoint or the path of a
recorded response file. Tests run entirely on recorded responses, which
keeps them hermetic and bit-reproducible.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import requests

from .defaults import DEFAULT_ENTITY_LIMIT, DEFAULT_MIN_BIRTH_YEAR
from .errors import ConfigError, ParseError, SourceUnavailableError

__all__ = [
    "EntityQuery",
    "EntityRecord",
    "load_query_config",
    "build_query",
    "fetch_entities",
    "rank_and_truncate",
]

# Page-view statistics exist from mid 2015 onward; earlier years can only be
# served from recorded fixtures.
FIRST_PAGE_VIEW_YEAR = 2015

_REQUIRED_VARS = ("entity", "entityLabel", "birthYear", "pageViews")

# One in-flight request per endpoint: shared public endpoints throttle hard.
_endpoint_locks: dict[str, threading.Lock] = {}
_endpoint_locks_guard = threading.Lock()


@dataclass(frozen=True)
class EntityQuery:
    """Parameters of one entity listing."""

    occupation: str
    page_view_year: int
    min_birth_year: int = DEFAULT_MIN_BIRTH_YEAR
    limit: int = DEFAULT_ENTITY_LIMIT

    def __post_init__(self) -> None:
        if self.limit < 1:
            raise ConfigError(f"limit must be at least 1, got {self.limit}")
        if not self.occupation:
            raise ConfigError("occupation must be non-empty")


@dataclass(frozen=True)
class EntityRecord:
    """One person returned by the listing."""

    entity_id: str
    display_name: str
    page_views: int
    birth_year: int

    def to_dict(self) -> dict:
        return {
            "entity_id": self.entity_id,
            "display_name": self.display_name,
            "page_views": self.page_views,
            "birth_year": self.birth_year,
        }


def load_query_config(path: str | Path | None = None) -> dict:
    """Load the query template config, defaulting to the packaged one."""
    if path is None:
        text = resources.files("facegraph").joinpath("data/entity_query.json").read_text()
    else:
        text = Path(path).read_text()
    config = json.loads(text)
    for key in ("template", "occupations", "language"):
        if key not in config:
            raise ConfigError(f"query config is missing {key!r}")
    return config


def build_query(query: EntityQuery, config: dict) -> str:
    """Fill the configured template with the query parameters.

    The occupation may be a name present in the config's occupation table
    or a raw knowledge-base id (``Q`` followed by digits).
    """
    occupations = config["occupations"]
    occupation_id = occupations.get(query.occupation)
    if occupation_id is None:
        candidate = query.occupation
        if candidate.startswith("Q") and candidate[1:].isdigit():
            occupation_id = candidate
        else:
            known = ", ".join(sorted(occupations))
            raise ConfigError(
                f"unknown occupation {query.occupation!r}; configured: {known}"
            )
    return config["template"].format(
        occupation_id=occupation_id,
        min_birth_year=query.min_birth_year,
        page_view_year=query.page_view_year,
        language=config["language"],
        limit=query.limit,
    )


def _endpoint_lock(endpoint: str) -> threading.Lock:
    with _endpoint_locks_guard:
        return _endpoint_locks.setdefault(endpoint, threading.Lock())


def _entity_id_from_uri(uri: str) -> str:
    return uri.rstrip("/").rsplit("/", 1)[-1]


def _parse_results(payload: dict) -> list[EntityRecord]:
    """Turn a SPARQL JSON result set into records, strictly."""
    try:
        bindings = payload["results"]["bindings"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"response lacks results.bindings: {exc!r}") from exc
    records = []
    for i, binding in enumerate(bindings):
        try:
            values = {name: binding[name]["value"] for name in _REQUIRED_VARS}
            records.append(
                EntityRecord(
                    entity_id=_entity_id_from_uri(values["entity"]),
                    display_name=values["entityLabel"],
                    page_views=int(values["pageViews"]),
                    birth_year=int(values["birthYear"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed binding at index {i}: {exc!r}") from exc
    return records


def _fetch_live(
    endpoint: str, sparql: str, timeout: float, max_attempts: int, retry_base_delay: float
) -> dict:
    last_error: Exception | None = None
    for attempt in range(max_attempts):
        if attempt:
            time.sleep(retry_base_delay * 2 ** (attempt - 1))
        try:
            with _endpoint_lock(endpoint):
                response = requests.get(
                    endpoint,
                    params={"query": sparql, "format": "json"},
                    headers={"Accept": "application/sparql-results+json"},
                    timeout=timeout,
                )
            if response.status_code != 200:
                last_error = RuntimeError(f"status {response.status_code}")
                continue
            try:
                return response.json()
            except ValueError as exc:
                raise ParseError(f"endpoint returned non-JSON body: {exc}") from exc
        except requests.RequestException as exc:
            last_error = exc
    raise SourceUnavailableError(
        f"{endpoint} unreachable after {max_attempts} attempts: {last_error}"
    )


def fetch_entities(
    query: EntityQuery,
    source: str | Path,
    *,
    config: dict | None = None,
    timeout: float = 30.0,
    max_attempts: int = 3,
    retry_base_delay: float = 0.5,
) -> list[EntityRecord]:
    """Fetch the entity listing from an endpoint or a recorded response.

    Args:
        query: listing parameters.
        source: ``http(s)://`` endpoint URL, or path of a recorded
            SPARQL JSON response.
        config: query template config; the packaged default when omitted.
        timeout: per-request timeout in seconds (live mode).
        max_attempts: total tries against a failing endpoint before
            giving up; waits back off exponentially between tries.
        retry_base_delay: first backoff delay in seconds.

    Returns:
        Records satisfying the birth-year constraint, in response order.
        Use :func:`rank_and_truncate` to order and cap them.

    Raises:
        SourceUnavailableError: endpoint still failing after all attempts.
        ParseError: response or fixture not in SPARQL JSON result shape.
        ConfigError: live page-view year before statistics exist, or an
            occupation the config does not know.
    """
    source = str(source)
    live = source.startswith("http://") or source.startswith("https://")
    if live:
        if query.page_view_year < FIRST_PAGE_VIEW_YEAR:
            raise ConfigError(
                f"page views start in {FIRST_PAGE_VIEW_YEAR}; "
                f"{query.page_view_year} can only come from a recorded fixture"
            )
        sparql = build_query(query, config or load_query_config())
        payload = _fetch_live(source, sparql, timeout, max_attempts, retry_base_delay)
    else:
        try:
            payload = json.loads(Path(source).read_text())
        except OSError as exc:
            raise SourceUnavailableError(
                f"fixture {source} cannot be read: {exc}"
            ) from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"fixture {source} is not valid JSON: {exc}") from exc
    records = _parse_results(payload)
    return [r for r in records if r.birth_year > query.min_birth_year]


def rank_and_truncate(records: list[EntityRecord], limit: int) -> list[EntityRecord]:
    """Order records by page views (descending) and keep the top ``limit``.

    Ties in page views break by ascending entity id, so the outcome never
    depends on input order.
    """
    if limit < 0:
        raise ConfigError(f"limit must be non-negative, got {limit}")
    ranked = sorted(records, key=lambda r: (-r.page_views, r.entity_id))
    return ranked[:limit]
