"""Shared construction helpers for the test suite.

Embeddings with an exact prescribed cosine against a base vector let tests
control similarity geometry precisely instead of sampling and hoping.
"""

from __future__ import annotations

import numpy as np

from facegraph.calibration import VerificationPair
from facegraph.embedding import FaceEmbedding, normalize


def unit(vector) -> FaceEmbedding:
    return normalize(np.asarray(vector, dtype=np.float64))


def random_unit(rng: np.random.Generator, dim: int) -> FaceEmbedding:
    return normalize(rng.standard_normal(dim))


def embedding_with_cosine(
    rng: np.random.Generator, base: FaceEmbedding, cos: float
) -> FaceEmbedding:
    """Random unit vector whose cosine against ``base`` is exactly ``cos``."""
    b = base.values
    while True:
        w = rng.standard_normal(b.shape[0])
        w = w - np.dot(w, b) * b
        norm = np.linalg.norm(w)
        if norm > 1e-9:
            break
    w = w / norm
    c = float(np.clip(cos, -1.0, 1.0))
    return FaceEmbedding(c * b + np.sqrt(max(0.0, 1.0 - c * c)) * w)


def pair_with_similarity(sim: float, same_person: bool, dim: int = 2) -> VerificationPair:
    """Pair of embeddings whose cosine similarity equals ``sim`` exactly."""
    a = np.zeros(dim)
    a[0] = 1.0
    b = np.zeros(dim)
    b[0] = sim
    b[1] = np.sqrt(max(0.0, 1.0 - sim * sim))
    return VerificationPair(FaceEmbedding(a), FaceEmbedding(b), same_person)


def gaussian_pairs(
    rng: np.random.Generator,
    n_pos: int,
    n_neg: int,
    pos_mu: float,
    pos_sigma: float,
    neg_mu: float,
    neg_sigma: float,
    dim: int = 8,
) -> list[VerificationPair]:
    """Labelled pairs whose similarities follow two Gaussian clusters."""
    pairs: list[VerificationPair] = []
    for n, mu, sigma, label in (
        (n_pos, pos_mu, pos_sigma, True),
        (n_neg, neg_mu, neg_sigma, False),
    ):
        for _ in range(n):
            sim = float(np.clip(rng.normal(mu, sigma), -0.999, 0.999))
            base = random_unit(rng, dim)
            other = embedding_with_cosine(rng, base, sim)
            pairs.append(VerificationPair(base, other, label))
    return pairs


def planar_face(angle_deg: float, dim: int = 8) -> FaceEmbedding:
    """Unit vector at a given angle inside the (e0, e1) plane."""
    import math

    v = np.zeros(dim)
    v[0] = math.cos(math.radians(angle_deg))
    v[1] = math.sin(math.radians(angle_deg))
    return FaceEmbedding(v)


def noisy_sample_set():
    """67 true faces spread over a wide arc, 33 impostors past its edge.

    The all-faces mean gets dragged toward the impostor side, so cleansing
    against it sheds the near-side true faces; a central reference face
    keeps almost everything true and none of the impostors.
    """
    from facegraph.dictionary import SampleFace, SampleSet

    faces = []
    for i in range(67):
        angle = 75.0 * i / 66.0
        faces.append(SampleFace(f"t{i:02d}", "Q1", planar_face(angle), "img", True))
    for j in range(33):
        angle = 100.0 + 10.0 * j / 32.0
        faces.append(SampleFace(f"x{j:02d}", "Q1", planar_face(angle), "img", False))
    return SampleSet(entity_id="Q1", faces=tuple(faces), reference_face_id="t26")


# --- scripted end-to-end corpus -------------------------------------------
#
# A 12-image scenario with hand-countable ground truth, used by both the
# CLI tests and the end-to-end acceptance test. Three persons live on
# orthogonal axes; a "stranger" face sits at cosine 0.5 to everyone, far
# below the identification threshold.
#
#   image contents            1:{A} 2:{A,B} 3:{B} 4:{C} 5:{A,C} 6:{B,C}
#                             7:{A,B,C} 8:{} 9:{A} 10:{stranger}
#                             11:{C,stranger} 12:{A,B,stranger}
#   single counts             A:6  B:5  C:5
#   joint counts              AB:3 AC:2 BC:2
#   unmatched faces           3 (images 10, 11, 12)
#
# The manifest also carries records that must never reach detection: a
# foreign domain, a wrong-year capture, a GIF, a malformed line, and a
# duplicate digest of image 1 with a later timestamp.

SCRIPTED_CONTENTS: dict[int, tuple[str, ...]] = {
    1: ("QA",), 2: ("QA", "QB"), 3: ("QB",), 4: ("QC",),
    5: ("QA", "QC"), 6: ("QB", "QC"), 7: ("QA", "QB", "QC"),
    8: (), 9: ("QA",), 10: ("stranger",), 11: ("QC", "stranger"),
    12: ("QA", "QB", "stranger"),
}

SCRIPTED_SINGLES = {"QA": 6, "QB": 5, "QC": 5}
SCRIPTED_JOINTS = {("QA", "QB"): 3, ("QA", "QC"): 2, ("QB", "QC"): 2}
SCRIPTED_UNMATCHED_TOTAL = 3
SCRIPTED_NAMES = {"QA": "Ada Ahl", "QB": "Ben Berg", "QC": "Cora Camp"}

# raw script vectors; detection normalizes them, so exact unit norm is
# not required here
_SCRIPT_VECTORS = {
    "QA": [0.99, 0.1, 0.05, 0.0],
    "QB": [0.1, 0.99, 0.0, 0.05],
    "QC": [0.05, 0.0, 0.99, 0.1],
    "stranger": [0.5, 0.5, 0.5, 0.5],
}


def scripted_corpus(root) -> dict:
    """Write manifest + detector script files; return paths and expectations."""
    import json
    from pathlib import Path

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)

    lines = []
    script: dict[str, list] = {}
    for i in range(1, 13):
        url = f"https://www.welt.de/bild{i:02d}.jpg"
        timestamp = f"201303{i:02d}120000"
        locator = f"loc{i:02d}"
        lines.append(f"{url} {timestamp} image/jpeg d{i:02d} {locator}")
        detections = [
            {"box": [10.0 * k, 5.0, 40.0, 40.0], "embedding": _SCRIPT_VECTORS[who]}
            for k, who in enumerate(SCRIPTED_CONTENTS[i])
        ]
        if detections:
            script[locator] = detections
    # records the pipeline must drop before detection
    lines.append("https://www.spiegel.de/out1.jpg 20130315120000 image/jpeg dx1 locx1")
    lines.append("https://www.welt.de/out2.jpg 20120315120000 image/jpeg dx2 locx2")
    lines.append("https://www.welt.de/out3.gif 20130315120000 image/gif dx3 locx3")
    lines.append("https://www.welt.de/dup.jpg 20130901120000 image/jpeg d01 locdup")
    lines.append("malformed line only-three-fields")

    manifest_path = root / "captures.manifest"
    manifest_path.write_text("\n".join(lines) + "\n")
    script_path = root / "detections.json"
    script_path.write_text(json.dumps(script))
    return {
        "manifest": manifest_path,
        "script": script_path,
        "parsed_records": 16,
        "rejected_lines": 1,
        "admitted_images": 12,
    }


def scripted_dictionary():
    """Dictionary matching the scripted corpus: one axis per person."""
    from facegraph.dictionary import DictionaryEntry, EntityDictionary

    axes = {"QA": [1, 0, 0, 0], "QB": [0, 1, 0, 0], "QC": [0, 0, 1, 0]}
    entries = {
        eid: DictionaryEntry(eid, SCRIPTED_NAMES[eid], unit(axis), 5)
        for eid, axis in axes.items()
    }
    return EntityDictionary(entries=entries, embedding_dim=4)
