"""Default operating points shared by the CLI, the service, and the library.

The two similarity thresholds below are the operating points measured for
the embedding model the pipeline was originally tuned with: the sample
filter threshold was calibrated on a standard face-verification benchmark
(98.0% mean accuracy, threshold std 0.002 across folds), and the stricter
identification threshold was chosen for high-precision retrieval (96% at
std 0.002). They are defaults, not constants of nature: recalibrate with
``facegraph calibrate`` whenever the embedding provider changes.
"""

from __future__ import annotations

# Keep-a-face threshold used when cleansing gathered sample sets.
DEFAULT_SAMPLE_FILTER_THRESHOLD = 0.757

# Accept-a-match threshold used when identifying faces against a dictionary.
DEFAULT_IDENTIFICATION_THRESHOLD = 0.833

# Embedding dimension used by synthetic pipelines when nothing else is given.
DEFAULT_EMBEDDING_DIM = 128

# Calibration protocol defaults.
DEFAULT_FOLD_COUNT = 10

# Sample gathering budget per entity.
DEFAULT_IMAGES_PER_ENTITY = 100

# Entity listing defaults.
DEFAULT_MIN_BIRTH_YEAR = 1920
DEFAULT_ENTITY_LIMIT = 100

# Image formats admitted by default; animated-GIF spam is excluded on purpose.
DEFAULT_IMAGE_FORMATS = frozenset({"image/jpeg", "image/png"})
