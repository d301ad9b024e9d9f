"""Foodness scoring behind pluggable detector backends.

An image's foodness is the maximum objectness over the regions the backend
detects (zero when nothing is detected): the score reads as "confidence
that at least one food item is present". The detector itself stays outside
this package; three backends cover testing (mock), replaying persisted
model outputs (sidecar), and calling a live inference service (remote).
"""

from __future__ import annotations

import hashlib
import io
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import httpx
from PIL import Image

from .errors import BackendUnavailableError, MissingScoreError, UndecodableImageError
from .manifest import ImageRecord, Status


@dataclass(frozen=True)
class Detection:
    """A normalized region proposal (origin top-left) with its objectness."""

    x: float
    y: float
    w: float
    h: float
    objectness: float

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box origin ({self.x}, {self.y}) outside [0, 1]")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box size ({self.w}, {self.h}) must be positive")
        if self.x + self.w > 1 or self.y + self.h > 1:
            raise ValueError("box exceeds the unit square")
        if not 0.0 <= self.objectness <= 1.0:
            raise ValueError(f"objectness {self.objectness} outside [0, 1]")


@dataclass(frozen=True)
class FoodnessResult:
    image_id: str
    detections: tuple[Detection, ...]
    foodness: float


class DetectorBackend(Protocol):
    def detect(self, data: bytes) -> list[Detection]: ...


class MockBackend:
    """Deterministic stand-in: detections derived from a keyed hash of the
    image's content hash, so scores are stable across runs and machines."""

    def __init__(self, key: str = "foodharvest-mock"):
        self.key = key

    def detect(self, data: bytes) -> list[Detection]:
        content_hash = hashlib.sha256(data).hexdigest()
        digest = hashlib.sha256(f"{self.key}:{content_hash}".encode()).digest()
        n_boxes = digest[0] % 3
        detections = []
        for i in range(n_boxes):
            chunk = digest[1 + i * 5 : 6 + i * 5]
            x = chunk[0] / 255 * 0.5
            y = chunk[1] / 255 * 0.5
            w = 0.05 + chunk[2] / 255 * (1.0 - x - 0.05)
            h = 0.05 + chunk[3] / 255 * (1.0 - y - 0.05)
            objectness = chunk[4] / 255
            detections.append(Detection(x=x, y=y, w=w, h=h, objectness=objectness))
        return detections


class SidecarBackend:
    """Replays persisted detector output: one `<content_hash>.score` text
    file per image holding a single decimal in [0, 1]."""

    def __init__(self, score_dir: Path | str):
        self.score_dir = Path(score_dir)

    def detect(self, data: bytes) -> list[Detection]:
        content_hash = hashlib.sha256(data).hexdigest()
        path = self.score_dir / f"{content_hash}.score"
        try:
            text = path.read_text(encoding="utf-8").strip()
        except FileNotFoundError:
            raise BackendUnavailableError(f"no sidecar score file at {path}")
        try:
            score = float(text)
        except ValueError:
            raise BackendUnavailableError(f"sidecar file {path} is not a decimal: {text!r}")
        if not 0.0 <= score <= 1.0:
            raise BackendUnavailableError(f"sidecar score {score} outside [0, 1] in {path}")
        return [Detection(x=0.0, y=0.0, w=1.0, h=1.0, objectness=score)]


@dataclass
class RemoteBackend:
    """POSTs raw image bytes to an inference service and parses the JSON
    detection list. In-flight requests are bounded."""

    endpoint: str
    max_inflight: int = 4
    timeout: float = 30.0
    _slots: threading.Semaphore = field(init=False, repr=False)
    _client: httpx.Client = field(init=False, repr=False)

    def __post_init__(self):
        self._slots = threading.Semaphore(self.max_inflight)
        self._client = httpx.Client(timeout=self.timeout)

    def detect(self, data: bytes) -> list[Detection]:
        with self._slots:
            try:
                response = self._client.post(
                    self.endpoint.rstrip("/") + "/detect",
                    content=data,
                    headers={"content-type": "application/octet-stream"},
                )
            except httpx.HTTPError as exc:
                raise BackendUnavailableError(f"inference service unreachable: {exc}")
        if response.status_code != 200:
            raise BackendUnavailableError(
                f"inference service returned {response.status_code}"
            )
        try:
            payload = response.json()
            return [
                Detection(
                    x=d["x"], y=d["y"], w=d["w"], h=d["h"], objectness=d["objectness"]
                )
                for d in payload["detections"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailableError(f"malformed detection response: {exc}")

    def close(self):
        self._client.close()


def score_image(image_id: str, data: bytes, backend: DetectorBackend) -> FoodnessResult:
    """Run one image through the backend and aggregate region objectness."""
    try:
        Image.open(io.BytesIO(data)).size
    except Exception:
        raise UndecodableImageError(f"image {image_id} could not be decoded")
    detections = tuple(backend.detect(data))
    foodness = max((d.objectness for d in detections), default=0.0)
    return FoodnessResult(image_id=image_id, detections=detections, foodness=foodness)


def filter_partition(
    records: list[ImageRecord], threshold: float
) -> tuple[list[ImageRecord], list[ImageRecord]]:
    """Split scored records at the threshold (score == threshold is kept).

    Kept records move to PENDING_REVIEW, the rest to AUTO_REJECTED.
    """
    kept = []
    rejected = []
    for record in records:
        if record.foodness is None:
            raise MissingScoreError(record.image_id)
        if record.foodness >= threshold:
            kept.append(record.with_status(Status.PENDING_REVIEW))
        else:
            rejected.append(record.with_status(Status.AUTO_REJECTED))
    return kept, rejected
