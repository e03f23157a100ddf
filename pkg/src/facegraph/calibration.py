"""Verification-threshold calibration over labelled face pairs.

A pair is verified as "same person" when the cosine similarity of its two
embeddings reaches a threshold. The threshold itself is calibrated by
k-fold cross-validation: for each fold, scan every decision boundary the
training similarities allow and keep the one with the best training
accuracy, then score it on the held-out fold. The per-fold thresholds are
averaged into the operating point shipped in :mod:`facegraph.defaults`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .defaults import DEFAULT_FOLD_COUNT
from .embedding import FaceEmbedding, cosine_similarity
from .errors import ConfigError, DimensionError, EmptySetError

__all__ = [
    "VerificationPair",
    "CalibrationResult",
    "ThresholdSearch",
    "verify",
    "best_threshold",
    "evaluate_threshold",
    "kfold_calibrate",
]


@dataclass(frozen=True)
class VerificationPair:
    """Two face embeddings plus the ground truth of whether they match."""

    a: FaceEmbedding
    b: FaceEmbedding
    same_person: bool

    def __post_init__(self) -> None:
        if self.a.dim != self.b.dim:
            raise DimensionError(
                f"pair dimensions disagree: {self.a.dim} vs {self.b.dim}"
            )


class ThresholdSearch(NamedTuple):
    """Outcome of a threshold scan: the boundary and its training accuracy."""

    threshold: float
    accuracy: float


@dataclass(frozen=True)
class CalibrationResult:
    """Aggregated k-fold calibration outcome.

    ``threshold_std`` is the population standard deviation of the per-fold
    thresholds. In degenerate folds (all pairs share one label) the scan
    returns a sentinel boundary outside the similarity range, so
    ``mean_threshold`` is only guaranteed to lie in [-1, 1] when every fold
    mixes positive and negative pairs.
    """

    mean_threshold: float
    per_fold_thresholds: tuple[float, ...]
    mean_accuracy: float
    threshold_std: float
    fold_count: int

    def to_dict(self) -> dict:
        return {
            "mean_threshold": self.mean_threshold,
            "per_fold_thresholds": list(self.per_fold_thresholds),
            "mean_accuracy": self.mean_accuracy,
            "threshold_std": self.threshold_std,
            "fold_count": self.fold_count,
        }


def verify(a: FaceEmbedding, b: FaceEmbedding, threshold: float) -> bool:
    """Decide whether two embeddings depict the same person.

    Returns ``cosine_similarity(a, b) >= threshold``, so the domain
    minimum -1.0 accepts every pair.
    """
    return cosine_similarity(a, b) >= threshold


def _similarities(pairs: Sequence[VerificationPair]) -> np.ndarray:
    return np.array([cosine_similarity(p.a, p.b) for p in pairs], dtype=np.float64)


def _labels(pairs: Sequence[VerificationPair]) -> np.ndarray:
    return np.array([p.same_person for p in pairs], dtype=bool)


def _candidate_thresholds(similarities: np.ndarray) -> np.ndarray:
    """Every decision boundary worth trying for these similarities.

    Midpoints between adjacent distinct values, plus one sentinel below the
    minimum (accept everything) and one above the maximum (reject
    everything). Scanning these exhaustively covers all achievable
    confusion tables.
    """
    distinct = np.unique(similarities)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    low = distinct[0] - 1.0
    high = distinct[-1] + 1.0
    return np.concatenate(([low], mids, [high]))


def best_threshold(pairs: Sequence[VerificationPair]) -> ThresholdSearch:
    """Exhaustively scan candidate boundaries for the best accuracy.

    Args:
        pairs: labelled pairs to fit the boundary on.

    Returns:
        The accuracy-maximizing threshold; when several candidates tie,
        the smallest one.

    Raises:
        EmptySetError: if no pairs are given.
    """
    if not pairs:
        raise EmptySetError("cannot fit a threshold on zero pairs")
    sims = _similarities(pairs)
    labels = _labels(pairs)
    best: ThresholdSearch | None = None
    for candidate in _candidate_thresholds(sims):
        accuracy = float(((sims >= candidate) == labels).mean())
        if best is None or accuracy > best.accuracy:
            best = ThresholdSearch(float(candidate), accuracy)
    assert best is not None
    return best


def evaluate_threshold(pairs: Sequence[VerificationPair], threshold: float) -> float:
    """Fraction of pairs the threshold decides correctly.

    Raises:
        EmptySetError: if no pairs are given.
    """
    if not pairs:
        raise EmptySetError("cannot evaluate a threshold on zero pairs")
    sims = _similarities(pairs)
    labels = _labels(pairs)
    return float(((sims >= threshold) == labels).mean())


def kfold_calibrate(
    pairs: Sequence[VerificationPair],
    k: int = DEFAULT_FOLD_COUNT,
    seed: int = 0,
) -> CalibrationResult:
    """Calibrate a verification threshold by k-fold cross-validation.

    Pairs are shuffled once with the given seed and split into k folds
    whose sizes differ by at most one. Each fold's threshold is fitted on
    the other k-1 folds with :func:`best_threshold` and scored on the
    held-out fold; thresholds and accuracies are averaged arithmetically.

    Args:
        pairs: labelled verification pairs.
        k: number of folds, at least 2 and at most ``len(pairs)``.
        seed: shuffle seed; fixing it reproduces the exact folds.

    Returns:
        A :class:`CalibrationResult` with per-fold detail.

    Raises:
        ConfigError: if ``k`` is out of range for the pair count.
    """
    n = len(pairs)
    if k < 2:
        raise ConfigError(f"need at least 2 folds, got {k}")
    if k > n:
        raise ConfigError(f"cannot split {n} pairs into {k} folds")

    order = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(order, k)

    thresholds: list[float] = []
    accuracies: list[float] = []
    for fold in folds:
        held_out = frozenset(int(i) for i in fold)
        train = [pairs[int(i)] for i in order if int(i) not in held_out]
        test = [pairs[int(i)] for i in fold]
        fitted = best_threshold(train)
        thresholds.append(fitted.threshold)
        accuracies.append(evaluate_threshold(test, fitted.threshold))

    t = np.array(thresholds)
    return CalibrationResult(
        mean_threshold=float(t.mean()),
        per_fold_thresholds=tuple(thresholds),
        mean_accuracy=float(np.mean(accuracies)),
        threshold_std=float(t.std()),
        fold_count=k,
    )
