"""Image records, search labels, and the JSON Lines manifest format.

The manifest is the contract between pipeline stages: one record per line
with a fixed field set, so two runs over identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

from .errors import ConfigError

_LABEL_ID_RE = re.compile(r"^[a-z0-9_-]+$")

MANIFEST_FIELDS = (
    "image_id",
    "label_id",
    "source_url",
    "rank",
    "content_hash",
    "width_px",
    "height_px",
    "status",
    "foodness",
    "noisy_reason",
)


class Status(str, Enum):
    FETCHED = "FETCHED"
    SCORED = "SCORED"
    AUTO_REJECTED = "AUTO_REJECTED"
    PENDING_REVIEW = "PENDING_REVIEW"
    NOISY_REJECTED = "NOISY_REJECTED"
    CONFIRMED = "CONFIRMED"
    ANNOTATED = "ANNOTATED"


class NoisyReason(str, Enum):
    IRRELEVANT = "IRRELEVANT"
    AESTHETIC = "AESTHETIC"


#: Statuses that count as "uploaded for review" in per-label statistics.
UPLOADED_STATUSES = frozenset(
    {Status.PENDING_REVIEW, Status.NOISY_REJECTED, Status.CONFIRMED, Status.ANNOTATED}
)


@dataclass(frozen=True)
class SearchLabel:
    """A food label used both as crawler query and annotation category."""

    id: str
    text: str

    def __post_init__(self):
        if not self.text:
            raise ConfigError("label text must be non-empty")
        if not _LABEL_ID_RE.match(self.id):
            raise ConfigError(f"label id {self.id!r} must match [a-z0-9_-]+")


@dataclass(frozen=True)
class ImageRecord:
    """One crawled image and its position in the curation lifecycle."""

    image_id: str
    label_id: str
    source_url: str
    rank: int
    content_hash: str
    width_px: int
    height_px: int
    status: Status = Status.FETCHED
    foodness: float | None = None
    noisy_reason: NoisyReason | None = None

    def with_score(self, foodness: float) -> "ImageRecord":
        return replace(self, status=Status.SCORED, foodness=foodness)

    def with_status(self, status: Status) -> "ImageRecord":
        return replace(self, status=status)

    def to_json(self) -> str:
        payload = {
            "image_id": self.image_id,
            "label_id": self.label_id,
            "source_url": self.source_url,
            "rank": self.rank,
            "content_hash": self.content_hash,
            "width_px": self.width_px,
            "height_px": self.height_px,
            "status": self.status.value,
            "foodness": self.foodness,
            "noisy_reason": self.noisy_reason.value if self.noisy_reason else None,
        }
        return json.dumps(payload, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "ImageRecord":
        raw = json.loads(line)
        return cls(
            image_id=raw["image_id"],
            label_id=raw["label_id"],
            source_url=raw["source_url"],
            rank=int(raw["rank"]),
            content_hash=raw["content_hash"],
            width_px=int(raw["width_px"]),
            height_px=int(raw["height_px"]),
            status=Status(raw["status"]),
            foodness=raw.get("foodness"),
            noisy_reason=NoisyReason(raw["noisy_reason"]) if raw.get("noisy_reason") else None,
        )


def load_manifest(path: Path | str) -> list[ImageRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(ImageRecord.from_json(line))
    return records


def write_manifest(path: Path | str, records: list[ImageRecord]) -> None:
    """Rewrite the manifest atomically (write to a temp file, then rename)."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")
    os.replace(tmp, path)


def load_labels(path: Path | str) -> list[SearchLabel]:
    """Read the labels file: a JSON array of {"id", "text"} objects."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"labels file {path} must hold a non-empty JSON array")
    labels = []
    seen = set()
    for entry in raw:
        label = SearchLabel(id=entry["id"], text=entry["text"])
        if label.id in seen:
            raise ConfigError(f"duplicate label id {label.id!r} in {path}")
        seen.add(label.id)
        labels.append(label)
    return labels
