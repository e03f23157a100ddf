"""Acceptance gate.

One test per shipping criterion. Each prints a single
``ACCEPTANCE PASS/FAIL`` line (visible with ``pytest -s``) and fails the
suite if its criterion is not met, including its runtime budget.
"""

from __future__ import annotations

import time

import numpy as np
from fastapi.testclient import TestClient

from facegraph.calibration import (
    VerificationPair,
    best_threshold,
    kfold_calibrate,
)
from facegraph.cooccurrence import (
    GraphEdge,
    GraphNode,
    OccurrenceCounts,
    RelationGraph,
    build_graph,
    count_occurrences,
    export_graph,
    parse_graph_json,
)
from facegraph.dictionary import (
    DictionaryEntry,
    EntityDictionary,
    SampleFace,
    SampleSet,
    evaluate_filtering,
    filter_features,
    select_target,
    set_reference,
)
from facegraph.embedding import (
    FaceEmbedding,
    cosine_similarity,
    cross_entropy,
    extract_features,
    mean_embedding,
    normalize,
    softmax,
    softmax_cross_entropy_gradient,
    train_toy_representation,
)
from facegraph.identification import IdentificationResult, identify_corpus, identify_face
from facegraph.ingestion import (
    ImageRecord,
    SearchSpace,
    apply_constraints,
    dedupe,
    embed_corpus,
    parse_manifest,
)
from facegraph.providers import SyntheticDetector
from facegraph.service import create_app
from facegraph.workspace import Workspace
from helpers import (
    SCRIPTED_JOINTS,
    SCRIPTED_NAMES,
    SCRIPTED_SINGLES,
    SCRIPTED_UNMATCHED_TOTAL,
    gaussian_pairs,
    noisy_sample_set,
    random_unit,
    scripted_corpus,
    scripted_dictionary,
    unit,
)


def check(label: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {status}: {label}{suffix}")
    assert ok, f"{label}{suffix}"


# --- criterion 1: embedding arithmetic ------------------------------------


def test_embedding_unit_suite():
    start = time.perf_counter()
    ok = True

    hot = np.array([0.0, 1.0, 0.0, 0.0])
    ok &= abs(cross_entropy(hot, hot) - 0.0) <= 1e-9
    uniform = np.full(4, 0.25)
    ok &= abs(cross_entropy(uniform, hot) - np.log(4.0)) <= 1e-9

    rng = np.random.default_rng(100)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(1, 11))
        vecs = [random_unit(rng, 8) for _ in range(k)]
        got = mean_embedding(vecs)
        raw = np.mean([v.values for v in vecs], axis=0)
        want = raw / np.linalg.norm(raw)
        worst = max(worst, float(np.max(np.abs(got.values - want))))
    ok &= worst <= 1e-9

    elapsed = time.perf_counter() - start
    ok &= elapsed < 1.0
    check(
        "cross-entropy analytic cases and 1000-set mean-embedding oracle",
        bool(ok),
        f"max mean deviation {worst:.2e}, {elapsed:.2f}s",
    )


# --- criterion 2: trainer gradients ----------------------------------------


def test_trainer_gradient_battery():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    step = 1e-5
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 10))
        scores = rng.standard_normal(n) * 2.0
        hot = np.zeros(n)
        hot[rng.integers(0, n)] = 1.0
        analytic = softmax_cross_entropy_gradient(scores, hot)
        numeric = np.zeros(n)
        for i in range(n):
            up, down = scores.copy(), scores.copy()
            up[i] += step
            down[i] -= step
            numeric[i] = (
                cross_entropy(softmax(up), hot) - cross_entropy(softmax(down), hot)
            ) / (2 * step)
        denom = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-12)
        worst = max(worst, float(np.linalg.norm(analytic - numeric) / denom))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-4 and elapsed < 5.0
    check(
        "training gradients match central differences on 100 instances",
        ok,
        f"worst relative error {worst:.2e}, {elapsed:.2f}s",
    )


# --- criterion 3: learned feature space ------------------------------------


def test_feature_space_clusters_held_out():
    start = time.perf_counter()
    rng = np.random.default_rng(102)

    def blobs(per_class: int):
        centers = np.zeros((3, 12))
        for c in range(3):
            centers[c, c] = 4.0
        out = []
        for label, center in enumerate(centers):
            for _ in range(per_class):
                out.append((center + 0.4 * rng.standard_normal(12), label))
        return out

    model = train_toy_representation(blobs(30), epochs=200, seed=7)
    held_out = [(extract_features(model, v), label) for v, label in blobs(10)]
    intra, inter = [], []
    for i in range(len(held_out)):
        for j in range(i + 1, len(held_out)):
            sim = cosine_similarity(held_out[i][0], held_out[j][0])
            (intra if held_out[i][1] == held_out[j][1] else inter).append(sim)
    gap = float(np.mean(intra) - np.mean(inter))
    elapsed = time.perf_counter() - start
    ok = gap >= 0.2 and elapsed < 30.0
    check(
        "held-out intra-class similarity beats inter-class by 0.2",
        ok,
        f"gap {gap:.3f}, {elapsed:.2f}s",
    )


# --- criterion 4: threshold calibration ------------------------------------


def oracle_best_threshold(pairs: list[VerificationPair]) -> tuple[float, float]:
    sims = sorted({cosine_similarity(p.a, p.b) for p in pairs})
    candidates = [sims[0] - 1.0]
    candidates += [(a + b) / 2.0 for a, b in zip(sims, sims[1:])]
    candidates.append(sims[-1] + 1.0)
    best = None
    for t in candidates:
        correct = sum(
            1
            for p in pairs
            if (cosine_similarity(p.a, p.b) >= t) == p.same_person
        )
        acc = correct / len(pairs)
        if best is None or acc > best[1]:
            best = (t, acc)
    return best


def test_threshold_calibration_protocol():
    start = time.perf_counter()
    rng = np.random.default_rng(103)
    pairs = gaussian_pairs(rng, 300, 300, 0.85, 0.03, 0.40, 0.08)
    result = kfold_calibrate(pairs, k=10, seed=0)
    ok = result.mean_accuracy >= 0.99 and result.threshold_std <= 0.03

    agreements = 0
    instances = 40
    grid = np.linspace(-0.9, 0.9, 13)
    for _ in range(instances):
        n = int(rng.integers(2, 101))
        sample = [
            VerificationPair(
                *_pair_vectors(float(rng.choice(grid))), bool(rng.uniform() < 0.5)
            )
            for _ in range(n)
        ]
        if best_threshold(sample) == oracle_best_threshold(sample):
            agreements += 1
    ok &= agreements == instances

    elapsed = time.perf_counter() - start
    ok &= elapsed < 10.0
    check(
        "cross-validated threshold search: accuracy, stability, scan-oracle equality",
        bool(ok),
        f"accuracy {result.mean_accuracy:.4f}, std {result.threshold_std:.4f}, "
        f"oracle agreement {agreements}/{instances}, {elapsed:.2f}s",
    )


def _pair_vectors(sim: float):
    a = np.zeros(4)
    a[0] = 1.0
    b = np.zeros(4)
    b[0] = sim
    b[1] = np.sqrt(max(0.0, 1.0 - sim * sim))
    return FaceEmbedding(a), FaceEmbedding(b)


# --- criterion 5: filtering metrics and strategy ordering -------------------


def test_keep_all_metrics_and_strategy_ordering():
    start = time.perf_counter()
    rng = np.random.default_rng(104)

    base = random_unit(rng, 8)
    faces = []
    for i in range(1000):
        faces.append(
            SampleFace(
                face_id=f"f{i:04d}",
                entity_id="Q1",
                embedding=random_unit(rng, 8),
                source_image="img",
                ground_truth=i < 669,
            )
        )
    keep_all_set = SampleSet(entity_id="Q1", faces=tuple(faces))
    report = filter_features(keep_all_set, base, threshold=-1.0, strategy="mean")
    metrics = evaluate_filtering(report, keep_all_set)
    exact = (
        len(report.kept) == 1000
        and metrics.precision == 0.669
        and metrics.recall == 1.0
        and round(metrics.f1, 3) == 0.802
    )

    noisy = noisy_sample_set()

    def run(strategy: str | None):
        if strategy is None:
            target = select_target(noisy, "mean")
            rep = filter_features(noisy, target, threshold=-1.0, strategy="mean")
        else:
            target = select_target(noisy, strategy)
            rep = filter_features(noisy, target, threshold=0.757, strategy=strategy)
        return evaluate_filtering(rep, noisy)

    none_m, mean_m, ref_m = run(None), run("mean"), run("reference")
    ordering = ref_m.f1 > none_m.f1 and mean_m.recall < ref_m.recall

    elapsed = time.perf_counter() - start
    ok = exact and ordering and elapsed < 5.0
    check(
        "keep-all metrics on a 669/331 split and filter-strategy quality ordering",
        ok,
        f"precision {metrics.precision:.3f}, F1 {metrics.f1:.4f}; "
        f"F1 none/mean/ref {none_m.f1:.3f}/{mean_m.f1:.3f}/{ref_m.f1:.3f}, "
        f"{elapsed:.2f}s",
    )


# --- criterion 6: identification vs argmax oracle ---------------------------


def test_identification_matches_argmax_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(105)
    mismatches = 0
    total = 0
    for batch in range(100):
        dim = int(rng.choice([8, 16, 32]))
        n_entities = int(rng.integers(2, 21))
        vectors = {f"Q{i:03d}": random_unit(rng, dim) for i in range(n_entities)}
        if batch % 3 == 0:
            # duplicated vector under a later id forces exact argmax ties
            vectors[f"Q{n_entities:03d}"] = vectors["Q000"]
        entries = {
            eid: DictionaryEntry(eid, eid, vec, 1) for eid, vec in vectors.items()
        }
        dictionary = EntityDictionary(entries=entries, embedding_dim=dim)
        ordered_ids = sorted(vectors)
        matrix = np.stack([vectors[eid].values for eid in ordered_ids])
        for _ in range(100):
            total += 1
            roll = rng.uniform()
            if roll < 0.2:
                query = vectors[f"Q{int(rng.integers(0, n_entities)):03d}"]
            elif roll < 0.5:
                base = vectors[f"Q{int(rng.integers(0, n_entities)):03d}"]
                mix = base.values + 0.15 * rng.standard_normal(dim)
                query = normalize(mix)
            else:
                query = random_unit(rng, dim)
            threshold = float(rng.choice([0.5, 0.833, 0.95]))
            sims = np.clip(matrix @ query.values, -1.0, 1.0)
            best = int(np.argmax(sims))
            expected = (
                None
                if sims[best] < threshold
                else (ordered_ids[best], float(sims[best]))
            )
            got = identify_face(query, dictionary, threshold)
            if expected is None or got is None:
                agree = expected is None and got is None
            else:
                agree = got[0] == expected[0] and abs(got[1] - expected[1]) <= 1e-12
            mismatches += 0 if agree else 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and total == 10_000 and elapsed < 10.0
    check(
        "identification equals the linear argmax oracle on 10k instances with ties",
        ok,
        f"{total} instances, {mismatches} mismatches, {elapsed:.2f}s",
    )


# --- criterion 7: corpus constraint filtering -------------------------------


def test_constraint_filtering_bit_exact():
    start = time.perf_counter()
    rng = np.random.default_rng(106)
    domains = ["welt.de", "sub.welt.de", "bild.de", "example.com", "welt.de.evil.org"]
    mimes = ["image/jpeg", "image/png", "image/gif", "text/html"]
    stamps = [
        "20130101000000",
        "20131231235959",
        "20121231235959",
        "20140101000000",
        "20130615120000",
        "20129999aaaaaa",  # never parses, never reaches records
    ]
    records = []
    i = 0
    while len(records) < 10_000:
        domain = domains[int(rng.integers(0, len(domains)))]
        mime = mimes[int(rng.integers(0, len(mimes)))]
        stamp = stamps[int(rng.integers(0, 5))]
        records.append(
            ImageRecord.from_fields(
                f"https://{domain}/p/{i}.img", stamp, mime, f"d{i}", f"loc{i}"
            )
        )
        i += 1
    space = SearchSpace.for_year(["welt.de", "bild.de"], 2013)

    def admits(record: ImageRecord) -> bool:
        host_ok = any(
            record.domain == d or record.domain.endswith("." + d)
            for d in ["welt.de", "bild.de"]
        )
        mime_ok = record.mime in {"image/jpeg", "image/png"}
        time_ok = "20130101000000" <= record.capture_timestamp <= "20131231235959"
        return host_ok and mime_ok and time_ok

    got = apply_constraints(records, space)
    want = [r for r in records if admits(r)]
    gifs_excluded = all(r.mime != "image/gif" for r in got)

    boundary_low = ImageRecord.from_fields(
        "https://welt.de/low.jpg", "20130101000000", "image/jpeg", "bl", "bl"
    )
    boundary_high = ImageRecord.from_fields(
        "https://welt.de/high.jpg", "20131231235959", "image/jpeg", "bh", "bh"
    )
    boundaries_in = space.admits(boundary_low) and space.admits(boundary_high)

    elapsed = time.perf_counter() - start
    ok = got == want and gifs_excluded and boundaries_in and elapsed < 2.0
    check(
        "constraint filtering is bit-exact on 10k records with inclusive year bounds",
        ok,
        f"{len(got)} admitted of {len(records)}, {elapsed:.2f}s",
    )


# --- criterion 8: co-occurrence counting ------------------------------------


def test_cooccurrence_oracle_and_roundtrip():
    start = time.perf_counter()
    rng = np.random.default_rng(107)
    entities = [f"Q{i}" for i in range(9)]

    def random_results(n: int) -> list[IdentificationResult]:
        out = []
        for i in range(n):
            k = int(rng.integers(0, 5))
            picked = sorted(
                rng.choice(entities, size=k, replace=False).tolist() if k else []
            )
            out.append(
                IdentificationResult(
                    f"u{i}", "20130101000000",
                    tuple((e, 0.9) for e in picked), 0,
                )
            )
        return out

    results = random_results(500)
    counts = count_occurrences(results)
    singles: dict[str, int] = {}
    joints: dict[tuple[str, str], int] = {}
    for r in results:
        ids = sorted({e for e, _ in r.recognized})
        for e in ids:
            singles[e] = singles.get(e, 0) + 1
        for x in range(len(ids)):
            for y in range(x + 1, len(ids)):
                joints[(ids[x], ids[y])] = joints.get((ids[x], ids[y]), 0) + 1
    oracle_ok = counts.singles == singles and counts.joints == joints

    invariant_ok = True
    for _ in range(100):
        corpus_counts = count_occurrences(random_results(int(rng.integers(10, 80))))
        try:
            OccurrenceCounts(
                singles=corpus_counts.singles, joints=corpus_counts.joints
            )
        except ValueError:
            invariant_ok = False
            break

    graph = build_graph(counts)
    roundtrip_ok = parse_graph_json(export_graph(graph, "json")) == graph

    elapsed = time.perf_counter() - start
    ok = oracle_ok and invariant_ok and roundtrip_ok and elapsed < 5.0
    check(
        "co-occurrence counts equal the brute-force oracle and export losslessly",
        ok,
        f"{len(counts.singles)} entities, {len(counts.joints)} pairs, {elapsed:.2f}s",
    )


# --- criterion 9: end-to-end scripted corpus --------------------------------


def run_scripted_pipeline(root):
    fixture = scripted_corpus(root)
    parsed = parse_manifest(fixture["manifest"])
    space = SearchSpace.for_year(["welt.de"], 2013)
    admitted = dedupe(apply_constraints(parsed.records, space))
    detector = SyntheticDetector.from_file(fixture["script"])
    extraction = embed_corpus(admitted, detector)
    dictionary = scripted_dictionary()
    results = identify_corpus(
        extraction.observations, dictionary, images=admitted
    )
    counts = count_occurrences(results)
    graph = build_graph(counts, names=SCRIPTED_NAMES)
    return parsed, admitted, results, graph


def test_end_to_end_scripted_corpus(tmp_path):
    start = time.perf_counter()
    parsed, admitted, results, graph = run_scripted_pipeline(tmp_path / "run1")
    _, _, results2, graph2 = run_scripted_pipeline(tmp_path / "run2")

    expected = RelationGraph(
        nodes=tuple(
            GraphNode(eid, SCRIPTED_NAMES[eid], SCRIPTED_SINGLES[eid])
            for eid in sorted(SCRIPTED_SINGLES)
        ),
        edges=tuple(
            GraphEdge(a, b, w) for (a, b), w in sorted(SCRIPTED_JOINTS.items())
        ),
    )
    pipeline_ok = (
        len(parsed.records) == 16
        and len(parsed.rejects) == 1
        and len(admitted) == 12
        and len(results) == 12
        and sum(r.unmatched_face_count for r in results) == SCRIPTED_UNMATCHED_TOTAL
    )
    graph_ok = graph == expected
    stable_ok = (
        results == results2
        and export_graph(graph, "json") == export_graph(graph2, "json")
        and export_graph(graph, "graphml") == export_graph(graph2, "graphml")
    )
    elapsed = time.perf_counter() - start
    ok = pipeline_ok and graph_ok and stable_ok and elapsed < 10.0
    check(
        "scripted 12-image run reproduces the hand-computed graph byte-stably",
        ok,
        f"{len(results)} images, {len(graph.nodes)} nodes, "
        f"{len(graph.edges)} edges, {elapsed:.2f}s",
    )


# --- criterion 10: service equals library -----------------------------------


def test_service_matches_library(tmp_path):
    ws = Workspace(tmp_path / "ws").initialize()
    faces = tuple(
        SampleFace(
            face_id=f"QA:s{i}.jpg#0",
            entity_id="QA",
            embedding=unit(vec),
            source_image=f"s{i}.jpg",
            ground_truth=truth,
        )
        for i, (vec, truth) in enumerate(
            [
                ([1.0, 0.02, 0.0, 0.0], True),
                ([0.99, -0.05, 0.03, 0.0], True),
                ([0.97, 0.1, 0.0, 0.05], True),
                ([0.1, 0.99, 0.0, 0.0], False),
            ]
        )
    )
    ws.save_samples(
        SampleSet(
            entity_id="QA",
            faces=faces,
            reference_face_id="QA:s0.jpg#0",
            display_name="Ada Ahl",
        )
    )
    dictionary = scripted_dictionary()
    ws.save_dictionary(dictionary, sample_filter_threshold=0.757, strategy="mean")
    _, _, results, _ = run_scripted_pipeline(tmp_path / "corpus")
    ws.save_results(results)

    client = TestClient(create_app(ws.root))

    listing_ok = client.get("/api/entities").json() == [
        s.to_dict() for s in ws.list_entities()
    ]

    sample_set = ws.load_samples("QA")
    target = select_target(sample_set, "mean")
    expected_sims = {
        f.face_id: cosine_similarity(f.embedding, target) for f in sample_set.faces
    }
    rows = client.get("/api/entities/QA/faces").json()
    faces_ok = len(rows) == 4 and all(
        abs(r["similarity_to_current_target"] - expected_sims[r["face_id"]]) <= 1e-12
        for r in rows
    )

    preview = client.post(
        "/api/entities/QA/filter-preview",
        json={"strategy": "reference", "lambda1": 0.757},
    ).json()
    ref_target = select_target(sample_set, "reference")
    report = filter_features(
        sample_set, ref_target, threshold=0.757, strategy="reference"
    )
    metrics = evaluate_filtering(report, sample_set)
    preview_ok = preview == {
        "report": report.to_dict(),
        "metrics": metrics.to_dict(),
    }

    client.post("/api/entities/QA/reference", json={"face_id": "QA:s2.jpg#0"})
    expected_updated = set_reference(sample_set, "QA:s2.jpg#0")
    reference_ok = Workspace(ws.root).load_samples("QA") == expected_updated

    names = {
        eid: e.display_name
        for eid, e in dictionary.entries.items()
        if e.display_name
    }
    expected_graph = export_graph(
        build_graph(count_occurrences(results), names=names), "json"
    )
    graph_ok = client.get("/api/graph").content == expected_graph

    ok = listing_ok and faces_ok and preview_ok and reference_ok and graph_ok
    check(
        "every service endpoint returns the library's own output",
        ok,
        f"entities {listing_ok}, faces {faces_ok}, preview {preview_ok}, "
        f"reference {reference_ok}, graph {graph_ok}",
    )
