"""Record service responses as JSON contract fixtures for the UI tests.

Builds a small deterministic workspace, runs the HTTP service against it
in-process, and writes each response to contracts/ as canonically formatted
JSON (sorted keys, two-space indent, trailing newline). The UI tests read
these files instead of talking to a live server, and a Python test
regenerates them to guarantee the recorded bytes never drift from what the
service actually returns.

Run from the repository root:

    python3 scripts/gen_contract_fixtures.py
"""

from __future__ import annotations

import json
import math
import sys
import tempfile
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from facegraph.dictionary import DictionaryEntry, EntityDictionary, SampleFace, SampleSet
from facegraph.embedding import FaceEmbedding
from facegraph.identification import IdentificationResult
from facegraph.service import create_app
from facegraph.workspace import Workspace

REPO_ROOT = Path(__file__).resolve().parent.parent

# angle (degrees) in the e0/e1 plane, whether the face truly shows QA
QA_FACES = [
    ("img1.jpg", 0.0, True),  # the reference face
    ("img2.jpg", 8.0, True),
    ("img3.jpg", 16.0, True),
    ("img4.jpg", 24.0, True),
    ("img5.jpg", 95.0, False),
    ("img6.jpg", 103.0, False),
]
QB_FACES = [("pic1.jpg", 40.0), ("pic2.jpg", 50.0), ("pic3.jpg", 60.0)]

# per-image entity sets behind the recorded graph: singles QA 6 / QB 5 /
# QC 5, joints QA-QB 3 / QA-QC 2 / QB-QC 2, three unmatched faces
IMAGE_CONTENTS = [
    ({"QA"}, 0),
    ({"QA", "QB"}, 0),
    ({"QB"}, 0),
    ({"QC"}, 0),
    ({"QA", "QC"}, 0),
    ({"QB", "QC"}, 0),
    ({"QA", "QB", "QC"}, 0),
    (set(), 0),
    ({"QA"}, 0),
    (set(), 1),
    ({"QC"}, 1),
    ({"QA", "QB"}, 1),
]

# reference-strategy preview thresholds, ascending: each removes a strict
# superset of the previous one's tiles
PREVIEW_THRESHOLDS = [
    ("preview_qa_keepall", -1.0),
    ("preview_qa_mid", 0.5),
    ("preview_qa_strict", 0.93),
    ("preview_qa_strictest", 0.97),
]


def planar(angle_deg: float) -> FaceEmbedding:
    a = math.radians(angle_deg)
    return FaceEmbedding(np.array([math.cos(a), math.sin(a), 0.0, 0.0]))


def axis(i: int) -> FaceEmbedding:
    v = np.zeros(4)
    v[i] = 1.0
    return FaceEmbedding(v)


def build_workspace(root: Path) -> Workspace:
    ws = Workspace(root).initialize()
    ws.save_samples(
        SampleSet(
            entity_id="QA",
            faces=tuple(
                SampleFace(
                    face_id=f"QA:{image}#0",
                    entity_id="QA",
                    embedding=planar(angle),
                    source_image=image,
                    ground_truth=truth,
                )
                for image, angle, truth in QA_FACES
            ),
            reference_face_id="QA:img1.jpg#0",
            display_name="Ada Ahl",
        )
    )
    ws.save_samples(
        SampleSet(
            entity_id="QB",
            faces=tuple(
                SampleFace(
                    face_id=f"QB:{image}#0",
                    entity_id="QB",
                    embedding=planar(angle),
                    source_image=image,
                    ground_truth=None,
                )
                for image, angle in QB_FACES
            ),
            display_name="Ben Berg",
        )
    )
    names = {"QA": "Ada Ahl", "QB": "Ben Berg", "QC": "Cora Camp"}
    ws.save_dictionary(
        EntityDictionary(
            entries={
                eid: DictionaryEntry(eid, names[eid], axis(i), 4)
                for i, eid in enumerate(["QA", "QB", "QC"])
            },
            embedding_dim=4,
        ),
        sample_filter_threshold=0.757,
        strategy="mean",
    )
    ws.save_results(
        [
            IdentificationResult(
                url=f"https://www.welt.de/bild{i:02d}.jpg",
                timestamp=f"201303{i:02d}120000",
                recognized=tuple((eid, 0.9) for eid in sorted(present)),
                unmatched_face_count=unmatched,
            )
            for i, (present, unmatched) in enumerate(IMAGE_CONTENTS, start=1)
        ]
    )
    return ws


def _dump(payload: object) -> bytes:
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()


def generate(out_dir: Path) -> dict[str, bytes]:
    """Record every fixture into ``out_dir``; returns {filename: bytes}."""
    with tempfile.TemporaryDirectory(prefix="contracts-ws-") as scratch:
        ws = build_workspace(Path(scratch) / "workspace")
        fixtures = _record_all(TestClient(create_app(ws.root)))
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, blob in fixtures.items():
        (out_dir / name).write_bytes(blob)
    return fixtures


def _record_all(client: TestClient) -> dict[str, bytes]:
    fixtures: dict[str, bytes] = {}

    def record(name: str, payload: object) -> None:
        fixtures[f"{name}.json"] = _dump(payload)

    record("entities", client.get("/api/entities").json())
    # session strategy is still the default mean here
    record("faces_qa_mean", client.get("/api/entities/QA/faces").json())

    for name, threshold in PREVIEW_THRESHOLDS:
        response = client.post(
            "/api/entities/QA/filter-preview",
            json={"strategy": "reference", "lambda1": threshold},
        )
        response.raise_for_status()
        record(name, response.json())

    # the previews above switched the session to the reference strategy,
    # so similarities are now against the reference face (top row, 1.0)
    record("faces_qa_reference", client.get("/api/entities/QA/faces").json())

    missing = client.post(
        "/api/entities/QB/filter-preview",
        json={"strategy": "reference", "lambda1": 0.757},
    )
    assert missing.status_code == 422
    record("error_missing_reference", missing.json())

    record("graph", client.get("/api/graph").json())
    return fixtures


def main() -> None:
    out = REPO_ROOT / "contracts"
    fixtures = generate(out)
    for name in sorted(fixtures):
        print(f"wrote contracts/{name}")


if __name__ == "__main__":
    sys.exit(main())
