"""Local HTTP service for curation and inspection.

Every endpoint is a thin adapter over the library: responses are the
serialized output of the corresponding library call on the workspace
files, nothing more. State that belongs to the browsing session (the
active strategy and filter threshold) lives in memory; everything an
endpoint mutates is persisted to the workspace before the response is
sent.

The service is a single-analyst local tool: it binds to loopback by
default and has no authentication.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .cooccurrence import build_graph, count_occurrences, export_graph
from .defaults import DEFAULT_SAMPLE_FILTER_THRESHOLD
from .dictionary import (
    STRATEGIES,
    evaluate_filtering,
    filter_features,
    select_target,
    set_reference,
)
from .embedding import cosine_similarity
from .errors import MissingReferenceError, NotFoundError
from .workspace import Workspace

__all__ = ["create_app"]

NO_WORKSPACE_GUIDANCE = (
    "workspace directory not found; create one with the gather and identify "
    "commands, or point --workspace at an existing directory"
)

FALLBACK_PAGE = """<!doctype html>
<title>facegraph service</title>
<h1>facegraph service</h1>
<p>No UI bundle is installed. The JSON API is live:</p>
<ul>
<li><code>GET /api/entities</code></li>
<li><code>GET /api/entities/{id}/faces</code></li>
<li><code>POST /api/entities/{id}/reference</code></li>
<li><code>POST /api/entities/{id}/filter-preview</code></li>
<li><code>GET /api/graph</code></li>
</ul>
"""


class ReferenceRequest(BaseModel):
    face_id: str


class PreviewRequest(BaseModel):
    strategy: str
    lambda1: float


class SessionState:
    """Per-process curation session: active strategy and threshold."""

    def __init__(self) -> None:
        self.strategy: str = "mean"
        self.sample_filter_threshold: float = DEFAULT_SAMPLE_FILTER_THRESHOLD


def create_app(workspace_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    """Build the FastAPI app bound to one workspace directory."""
    workspace = Workspace(workspace_dir)
    session = SessionState()
    entity_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
    locks_guard = threading.Lock()

    app = FastAPI(title="facegraph", docs_url=None, redoc_url=None)

    def require_workspace() -> None:
        if not workspace.exists():
            raise HTTPException(status_code=409, detail=NO_WORKSPACE_GUIDANCE)

    def load_entity(entity_id: str):
        require_workspace()
        try:
            return workspace.load_samples(entity_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    def lock_for(entity_id: str) -> threading.Lock:
        with locks_guard:
            return entity_locks[entity_id]

    @app.get("/api/entities")
    def list_entities() -> list[dict]:
        require_workspace()
        return [summary.to_dict() for summary in workspace.list_entities()]

    @app.get("/api/entities/{entity_id}/faces")
    def entity_faces(entity_id: str) -> list[dict]:
        sample_set = load_entity(entity_id)
        try:
            target = select_target(sample_set, session.strategy)
        except MissingReferenceError:
            # the session prefers references but this entity has none yet
            target = select_target(sample_set, "mean")
        rows = [
            {
                "face_id": face.face_id,
                "crop_url": workspace.crop_url(face.face_id),
                "similarity_to_current_target": cosine_similarity(
                    face.embedding, target
                ),
            }
            for face in sample_set.faces
        ]
        rows.sort(key=lambda r: (-r["similarity_to_current_target"], r["face_id"]))
        return rows

    @app.post("/api/entities/{entity_id}/reference")
    def set_entity_reference(entity_id: str, body: ReferenceRequest) -> dict:
        with lock_for(entity_id):
            sample_set = load_entity(entity_id)
            try:
                updated = set_reference(sample_set, body.face_id)
            except NotFoundError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
            workspace.save_samples(updated)
        return {"entity_id": entity_id, "reference_face_id": body.face_id}

    @app.post("/api/entities/{entity_id}/filter-preview")
    def filter_preview(entity_id: str, body: PreviewRequest) -> dict:
        sample_set = load_entity(entity_id)
        if body.strategy not in STRATEGIES:
            raise HTTPException(
                status_code=422,
                detail=f"unknown strategy {body.strategy!r}; expected one of {STRATEGIES}",
            )
        try:
            target = select_target(sample_set, body.strategy)
        except MissingReferenceError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        report = filter_features(
            sample_set, target, threshold=body.lambda1, strategy=body.strategy
        )
        metrics = None
        if all(face.ground_truth is not None for face in sample_set.faces):
            metrics = evaluate_filtering(report, sample_set)
        # the preview itself is not persisted, but it becomes the session's
        # working configuration for subsequent face listings
        session.strategy = body.strategy
        session.sample_filter_threshold = body.lambda1
        return {
            "report": report.to_dict(),
            "metrics": metrics.to_dict() if metrics is not None else None,
        }

    @app.get("/api/graph")
    def relation_graph() -> Response:
        require_workspace()
        try:
            results = workspace.load_results()
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        names = {}
        try:
            dictionary, _ = workspace.load_dictionary()
            names = {
                eid: entry.display_name
                for eid, entry in dictionary.entries.items()
                if entry.display_name
            }
        except NotFoundError:
            pass
        graph = build_graph(count_occurrences(results), names=names)
        return Response(
            content=export_graph(graph, "json"), media_type="application/json"
        )

    app.mount(
        "/crops",
        StaticFiles(directory=workspace.crops_dir, check_dir=False),
        name="crops",
    )

    ui_path = Path(ui_dir) if ui_dir is not None else None
    if ui_path is not None and ui_path.is_dir():
        app.mount("/", StaticFiles(directory=ui_path, html=True), name="ui")
    else:

        @app.get("/", include_in_schema=False)
        def index() -> Response:
            return Response(content=FALLBACK_PAGE, media_type="text/html")

    return app
