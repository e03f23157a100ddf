"""Embedding vector math used by every stage of the pipeline.

All face embeddings are stored L2-normalized, so cosine similarity reduces
to a dot product and downstream thresholds stay comparable across sources.
The module also carries a deliberately small classifier trainer that
demonstrates the recipe behind the feature extractor: train a linear
projection with a softmax head on labelled vectors, then strip the head
and keep the projection as the embedding function.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DimensionError,
    EmptySetError,
    NormalizationError,
)

__all__ = [
    "FaceEmbedding",
    "ProbabilityDistribution",
    "ToyRepresentationModel",
    "normalize",
    "cosine_similarity",
    "mean_embedding",
    "cross_entropy",
    "softmax",
    "softmax_cross_entropy_gradient",
    "train_toy_representation",
    "extract_features",
    "UNIT_NORM_TOLERANCE",
    "PROBABILITY_FLOOR",
]

# How far a stored embedding may drift from unit length before we refuse it.
UNIT_NORM_TOLERANCE = 1e-6

# Probabilities are clamped here before the log so certainty never yields inf.
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class FaceEmbedding:
    """Unit-length feature vector for one face.

    Instances are immutable and always hold a 1-D float64 array whose L2
    norm is 1 within ``UNIT_NORM_TOLERANCE``. Build them through
    :func:`normalize` unless the values are already normalized.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise DimensionError("embedding must be a non-empty 1-D vector")
        norm = float(np.linalg.norm(v))
        if not np.isfinite(norm) or abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
            raise NormalizationError(
                f"embedding norm is {norm:.9g}, not 1; build it with normalize()"
            )
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FaceEmbedding):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def __repr__(self) -> str:  # keep logs short; vectors run to 128 entries
        head = ", ".join(f"{x:.4f}" for x in self.values[:3])
        return f"FaceEmbedding(dim={self.dim}, values=[{head}, ...])"


@dataclass(frozen=True)
class ProbabilityDistribution:
    """Discrete distribution over classes: non-negative, sums to one."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise DimensionError("distribution must be a non-empty 1-D vector")
        if np.any(p < 0.0):
            raise ValueError("distribution entries must be non-negative")
        total = float(p.sum())
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"distribution sums to {total:.9g}, not 1")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self) -> int:
        return int(self.probs.shape[0])


@dataclass
class ToyRepresentationModel:
    """Linear projection plus softmax head trained on labelled vectors.

    ``projection`` maps raw inputs to feature space; ``classifier`` maps
    features to class scores. Stripping the classifier (ignoring it) turns
    the model into a feature extractor; see :func:`extract_features`.
    """

    projection: np.ndarray
    classifier: np.ndarray
    class_labels: list
    loss_history: list

    @property
    def input_dim(self) -> int:
        return int(self.projection.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.projection.shape[1])

    @property
    def n_classes(self) -> int:
        return int(self.classifier.shape[1])


def normalize(vector: Sequence[float] | np.ndarray) -> FaceEmbedding:
    """Scale a raw vector to unit L2 norm.

    Args:
        vector: 1-D array-like with non-zero, finite norm.

    Returns:
        The vector as a :class:`FaceEmbedding`.

    Raises:
        NormalizationError: if the norm is zero or not finite.
        DimensionError: if the input is not a non-empty 1-D vector.
    """
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError("expected a non-empty 1-D vector")
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.isfinite(norm):
        raise NormalizationError(f"cannot normalize vector with norm {norm!r}")
    return FaceEmbedding(v / norm)


def cosine_similarity(a: FaceEmbedding, b: FaceEmbedding) -> float:
    """Cosine similarity of two embeddings, clamped to [-1, 1].

    Both inputs are unit length by construction, so this is their dot
    product; the clamp only absorbs floating-point overshoot.

    Raises:
        DimensionError: if the embeddings have different dimensions.
    """
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.clip(np.dot(a.values, b.values), -1.0, 1.0))


def mean_embedding(embeddings: Iterable[FaceEmbedding]) -> FaceEmbedding:
    """Arithmetic mean of embeddings, re-normalized to unit length.

    Args:
        embeddings: one or more embeddings of equal dimension.

    Returns:
        The renormalized component-wise average.

    Raises:
        EmptySetError: if no embeddings are given.
        DimensionError: if dimensions disagree.
        NormalizationError: if the average cancels to the zero vector.
    """
    items = list(embeddings)
    if not items:
        raise EmptySetError("mean of zero embeddings is undefined")
    dim = items[0].dim
    for e in items[1:]:
        if e.dim != dim:
            raise DimensionError(f"dimension mismatch: {dim} vs {e.dim}")
    stacked = np.stack([e.values for e in items])
    return normalize(stacked.mean(axis=0))


def _as_probs(dist: ProbabilityDistribution | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(dist, ProbabilityDistribution):
        return dist.probs
    return np.asarray(dist, dtype=np.float64)


def cross_entropy(
    predicted: ProbabilityDistribution | Sequence[float] | np.ndarray,
    target: ProbabilityDistribution | Sequence[float] | np.ndarray,
) -> float:
    """Cross-entropy of a predicted distribution against a target.

    Computes ``-sum(target[i] * log(predicted[i]))`` with the predicted
    probabilities clamped at ``PROBABILITY_FLOOR`` so a confident zero
    never produces infinity.

    Args:
        predicted: predicted class probabilities.
        target: target distribution, typically one-hot.

    Raises:
        DimensionError: if the two distributions differ in length.
    """
    p = _as_probs(predicted)
    t = _as_probs(target)
    if p.shape != t.shape:
        raise DimensionError(f"length mismatch: {p.shape} vs {t.shape}")
    clamped = np.maximum(p, PROBABILITY_FLOOR)
    return float(-(t * np.log(clamped)).sum())


def softmax(scores: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    z = np.asarray(scores, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy_gradient(scores: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Gradient of ``cross_entropy(softmax(scores), target)`` w.r.t. scores.

    The analytic form is ``softmax(scores) - target``; the trainer uses it
    directly and tests check it against central finite differences.
    """
    z = np.asarray(scores, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if z.shape != t.shape:
        raise DimensionError(f"shape mismatch: {z.shape} vs {t.shape}")
    return softmax(z) - t


def train_toy_representation(
    samples: Sequence[tuple[Sequence[float], object]],
    *,
    feature_dim: int = 16,
    epochs: int = 200,
    learning_rate: float = 0.5,
    seed: int = 0,
) -> ToyRepresentationModel:
    """Train the small projection-plus-softmax model with gradient descent.

    Full-batch descent on the mean cross-entropy; everything is seeded, so
    the same inputs and seed reproduce the exact same weights.

    Args:
        samples: ``(vector, label)`` pairs; at least two distinct labels
            and at least two samples per label.
        feature_dim: width of the feature space the projection maps into.
        epochs: number of full-batch update steps.
        learning_rate: plain gradient-descent step size.
        seed: seed for weight initialization.

    Returns:
        The trained model, with the per-epoch mean loss in
        ``loss_history`` (entry 0 is the pre-training loss).

    Raises:
        ConfigError: fewer than two classes, fewer than two samples for
            some class, or non-positive ``feature_dim``/``epochs``.
        DimensionError: if sample vectors disagree on dimension.
    """
    if feature_dim < 1:
        raise ConfigError(f"feature_dim must be positive, got {feature_dim}")
    if epochs < 1:
        raise ConfigError(f"epochs must be positive, got {epochs}")
    if not samples:
        raise ConfigError("no training samples given")

    vectors = [np.asarray(v, dtype=np.float64) for v, _ in samples]
    labels = [label for _, label in samples]
    input_dim = vectors[0].shape[0]
    for v in vectors:
        if v.ndim != 1 or v.shape[0] != input_dim:
            raise DimensionError("all sample vectors must share one dimension")

    class_labels = sorted(set(labels), key=repr)
    if len(class_labels) < 2:
        raise ConfigError(f"need at least 2 classes, got {len(class_labels)}")
    counts = {c: labels.count(c) for c in class_labels}
    thin = [c for c, n in counts.items() if n < 2]
    if thin:
        raise ConfigError(f"need at least 2 samples per class, too few for: {thin}")

    index = {c: i for i, c in enumerate(class_labels)}
    x = np.stack(vectors)
    n = x.shape[0]
    onehot = np.zeros((n, len(class_labels)))
    onehot[np.arange(n), [index[c] for c in labels]] = 1.0

    rng = np.random.default_rng(seed)
    projection = rng.standard_normal((input_dim, feature_dim)) / np.sqrt(input_dim)
    classifier = rng.standard_normal((feature_dim, len(class_labels))) / np.sqrt(feature_dim)

    def mean_loss(probs: np.ndarray) -> float:
        clamped = np.maximum(probs, PROBABILITY_FLOOR)
        return float(-(onehot * np.log(clamped)).sum() / n)

    history: list[float] = []
    for _ in range(epochs):
        hidden = x @ projection
        probs = softmax(hidden @ classifier)
        history.append(mean_loss(probs))
        d_scores = (probs - onehot) / n
        d_classifier = hidden.T @ d_scores
        d_hidden = d_scores @ classifier.T
        d_projection = x.T @ d_hidden
        classifier = classifier - learning_rate * d_classifier
        projection = projection - learning_rate * d_projection
    history.append(mean_loss(softmax((x @ projection) @ classifier)))

    return ToyRepresentationModel(
        projection=projection,
        classifier=classifier,
        class_labels=list(class_labels),
        loss_history=history,
    )


def extract_features(model: ToyRepresentationModel, vector: Sequence[float] | np.ndarray) -> FaceEmbedding:
    """Run only the projection of a trained model and normalize the result.

    The classifier head plays no part here: models differing only in
    classifier weights embed every input identically.

    Raises:
        DimensionError: if the input does not match the model's input dim.
        NormalizationError: if the projected vector is exactly zero.
    """
    v = np.asarray(vector, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != model.input_dim:
        raise DimensionError(
            f"input has dim {v.shape}, model expects {model.input_dim}"
        )
    return normalize(v @ model.projection)
