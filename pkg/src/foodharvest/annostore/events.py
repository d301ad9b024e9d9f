"""Event envelope and JSON Lines log I/O.

Events are the source of truth: seq is gap-free from 1 and replaying the
log reproduces the store state exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterator


class EventKind(str, Enum):
    IMAGE_ADDED = "IMAGE_ADDED"
    SCORED = "SCORED"
    AUTO_REJECTED = "AUTO_REJECTED"
    # The lifecycle needs an explicit edge from SCORED into the review queue;
    # the filter stage emits this for every record it keeps.
    REVIEW_QUEUED = "REVIEW_QUEUED"
    LEASED = "LEASED"
    VERDICT = "VERDICT"
    BOX_CREATED = "BOX_CREATED"
    BOX_DELETED = "BOX_DELETED"
    ANNOTATION_DONE = "ANNOTATION_DONE"


@dataclass(frozen=True)
class Event:
    seq: int
    at: datetime
    kind: EventKind
    payload: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "seq": self.seq,
                "at": self.at.isoformat(),
                "kind": self.kind.value,
                "payload": self.payload,
            },
            separators=(",", ":"),
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "Event":
        raw = json.loads(line)
        return cls(
            seq=int(raw["seq"]),
            at=datetime.fromisoformat(raw["at"]),
            kind=EventKind(raw["kind"]),
            payload=raw["payload"],
        )


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def read_event_log(path: Path | str, after_seq: int = 0) -> Iterator[Event]:
    """Yield events with seq greater than after_seq, in file order."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            event = Event.from_json(line)
            if event.seq > after_seq:
                yield event
