"""Pluggable face detection/embedding providers and sample-image sources.

The pipeline never decodes pixels itself. Anything that can turn an image
locator into a list of (bounding box, embedding vector) pairs can drive
it:

* ``SyntheticDetector`` replays a script. It backs the test suite and the
  end-to-end synthetic runs, and doubles as a fixture format.
* ``ExternalProcessDetector`` talks to a real detector over a line-based
  protocol: one locator per request line on stdin, one JSON array of
  ``{"box": [x, y, w, h], "embedding": [...]}`` objects per response line
  on stdout. A JSON object with an ``"error"`` key reports a failed
  decode for that locator.

Sample-image sources enumerate ``(name, locator)`` pairs for gathering:
a local directory (sorted by filename for reproducibility) or a URL list
file (kept in file order, because the list is the user's own ordering
of the crawl).
"""

from __future__ import annotations

import json
import logging
import subprocess
from pathlib import Path
from typing import Iterator, Mapping, Sequence

from .errors import DecodeError

__all__ = [
    "Detection",
    "SyntheticDetector",
    "ExternalProcessDetector",
    "DirectoryImages",
    "UrlListImages",
]

log = logging.getLogger(__name__)

# One detected face: ((x, y, w, h), embedding values).
Detection = tuple[tuple[float, float, float, float], list[float]]

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png")


def _validate_box(box: Sequence[float], locator: str) -> tuple[float, float, float, float]:
    if len(box) != 4:
        raise DecodeError(f"{locator}: bounding box needs 4 numbers, got {len(box)}")
    x, y, w, h = (float(v) for v in box)
    if w <= 0 or h <= 0:
        raise DecodeError(f"{locator}: bounding box has non-positive size {w}x{h}")
    return (x, y, w, h)


class SyntheticDetector:
    """Scripted detector: a mapping from locator to its detections.

    Script values are lists of ``{"box": [...], "embedding": [...]}``
    entries; ``None`` scripts a decode failure for that locator. Locators
    absent from the script simply contain no faces.
    """

    def __init__(self, script: Mapping[str, list | None]):
        self._script = dict(script)

    @classmethod
    def from_file(cls, path: str | Path) -> "SyntheticDetector":
        return cls(json.loads(Path(path).read_text()))

    def detect(self, locator: str) -> list[Detection]:
        if locator in self._script and self._script[locator] is None:
            raise DecodeError(f"scripted decode failure for {locator}")
        entries = self._script.get(locator, [])
        detections = []
        for entry in entries:
            box = _validate_box(entry["box"], locator)
            detections.append((box, [float(v) for v in entry["embedding"]]))
        return detections


class ExternalProcessDetector:
    """Detector living in a child process, one JSON line per image.

    The child is started lazily on first use and kept alive across
    requests. Use as a context manager (or call :meth:`close`) so the
    child does not outlive the run.
    """

    def __init__(self, argv: Sequence[str]):
        if not argv:
            raise ValueError("argv must name an executable")
        self._argv = list(argv)
        self._process: subprocess.Popen | None = None

    def _ensure_started(self) -> subprocess.Popen:
        if self._process is None or self._process.poll() is not None:
            self._process = subprocess.Popen(
                self._argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        return self._process

    def detect(self, locator: str) -> list[Detection]:
        if "\n" in locator:
            raise DecodeError(f"locator contains a newline: {locator!r}")
        process = self._ensure_started()
        try:
            assert process.stdin is not None and process.stdout is not None
            process.stdin.write(locator + "\n")
            process.stdin.flush()
            line = process.stdout.readline()
        except (BrokenPipeError, OSError) as exc:
            raise DecodeError(f"detector process failed on {locator}: {exc}") from exc
        if not line:
            code = process.poll()
            raise DecodeError(
                f"detector process closed its output on {locator} (exit code {code})"
            )
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DecodeError(f"detector sent malformed JSON for {locator}: {exc}") from exc
        if isinstance(payload, dict):
            raise DecodeError(
                f"detector reported an error for {locator}: {payload.get('error', payload)}"
            )
        if not isinstance(payload, list):
            raise DecodeError(f"detector response for {locator} is not a list")
        detections = []
        for entry in payload:
            box = _validate_box(entry["box"], locator)
            detections.append((box, [float(v) for v in entry["embedding"]]))
        return detections

    def close(self) -> None:
        if self._process is not None:
            if self._process.stdin is not None:
                try:
                    self._process.stdin.close()
                except OSError:
                    pass
            try:
                self._process.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._process.kill()
                self._process.wait()
            self._process = None

    def __enter__(self) -> "ExternalProcessDetector":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class DirectoryImages:
    """Sample images from a local directory, ordered by filename."""

    def __init__(self, directory: str | Path):
        self._directory = Path(directory)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        names = sorted(
            p.name
            for p in self._directory.iterdir()
            if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
        )
        for name in names:
            yield name, str(self._directory / name)


class UrlListImages:
    """Sample images named by a URL list file, kept in file order."""

    def __init__(self, list_path: str | Path):
        self._path = Path(list_path)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        for line in self._path.read_text().splitlines():
            url = line.strip()
            if url and not url.startswith("#"):
                yield url, url
