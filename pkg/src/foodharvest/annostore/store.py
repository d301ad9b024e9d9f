"""The annotation store: a fold over the event log.

All mutation goes through append(); the in-memory state is always exactly
fold(apply, initial, log). Service-level helpers (lease, record_verdict,
add_box, ...) validate worker authorization, build the event, and append
it; lifecycle legality is re-checked inside the fold so replaying a log
enforces the same rules that produced it.
"""

from __future__ import annotations

import json
import os
import statistics
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from pathlib import Path
from typing import Callable

from ..errors import (
    ConfigError,
    DuplicateSeqError,
    IllegalTransitionError,
    NotLeaseholderError,
    StoreError,
    UnknownImageError,
    ValidationError,
)
from ..manifest import ImageRecord, NoisyReason, SearchLabel, Status, UPLOADED_STATUSES
from .events import Event, EventKind, read_event_log, utc_now

LOG_FILE = "events.jsonl"

#: Statuses an image may hold a lease in.
LEASABLE_STATUSES = (Status.PENDING_REVIEW, Status.CONFIRMED)
#: Statuses that admit bounding-box events.
BOXABLE_STATUSES = (Status.CONFIRMED, Status.ANNOTATED)


@dataclass(frozen=True)
class TaskLease:
    image_id: str
    worker_id: str
    issued_at: datetime
    expires_at: datetime

    def active(self, now: datetime) -> bool:
        return now <= self.expires_at


@dataclass(frozen=True)
class BoxAnnotation:
    box_id: str
    image_id: str
    x: float
    y: float
    w: float
    h: float
    label_id: str
    worker_id: str
    created_at: datetime


@dataclass(frozen=True)
class VerdictRecord:
    image_id: str
    worker_id: str
    decision: str
    noisy_reason: NoisyReason | None
    elapsed_ms: int
    at: datetime


@dataclass(frozen=True)
class LabelStats:
    label_id: str
    label_text: str
    image_count: int
    box_count: int


@dataclass(frozen=True)
class StatsReport:
    rows: tuple[LabelStats, ...]
    total_images: int
    total_boxes: int


def _check_geometry(x: float, y: float, w: float, h: float) -> None:
    if x < 0 or y < 0 or w <= 0 or h <= 0 or x + w > 1 or y + h > 1:
        raise ValidationError(
            f"box (x={x}, y={y}, w={w}, h={h}) is degenerate or exceeds the unit square"
        )


class AnnotationStore:
    """Single-writer event-sourced store.

    Callers may be concurrent; every mutation is linearized under one lock.
    With a root directory the log is persisted (and replayed on open);
    without one the store is purely in-memory.
    """

    def __init__(
        self,
        labels: list[SearchLabel],
        root: Path | str | None = None,
        lease_ttl: float = 600.0,
        clock: Callable[[], datetime] = utc_now,
        fsync: bool = True,
    ):
        if not labels:
            raise ConfigError("the store needs at least one configured food label")
        self.labels = list(labels)
        self._label_ids = {label.id for label in self.labels}
        self.lease_ttl = lease_ttl
        self.clock = clock
        self.fsync = fsync

        self._lock = threading.RLock()
        self._images: dict[str, ImageRecord] = {}
        self._hashes: set[str] = set()
        self._boxes: dict[str, BoxAnnotation] = {}
        self._deleted_boxes: set[str] = set()
        self._leases: dict[str, TaskLease] = {}
        self._verdicts: list[VerdictRecord] = []
        self._last_seq = 0

        self.root = Path(root) if root is not None else None
        self._log_handle = None
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)
            self._replay_from_disk()
            self._log_handle = open(self.root / LOG_FILE, "a", encoding="utf-8")

    # ------------------------------------------------------------------
    # Event plumbing

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def append(self, kind: EventKind, payload: dict, at: datetime | None = None) -> Event:
        """Validate, persist, then fold one new event."""
        with self._lock:
            event = Event(
                seq=self._last_seq + 1,
                at=at or self.clock(),
                kind=kind,
                payload=payload,
            )
            self._apply(event, persist=True)
            return event

    def _apply(self, event: Event, persist: bool) -> None:
        with self._lock:
            if event.seq != self._last_seq + 1:
                raise DuplicateSeqError(
                    f"event seq {event.seq} does not follow {self._last_seq}"
                )
            mutate = self._validate(event)
            if persist and self._log_handle is not None:
                self._log_handle.write(event.to_json() + "\n")
                self._log_handle.flush()
                if self.fsync:
                    os.fsync(self._log_handle.fileno())
            mutate()
            self._last_seq = event.seq

    def _validate(self, event: Event) -> Callable[[], None]:
        """Check legality against current state; return the deferred mutation
        so a rejected event leaves the state untouched."""
        handler = {
            EventKind.IMAGE_ADDED: self._on_image_added,
            EventKind.SCORED: self._on_scored,
            EventKind.AUTO_REJECTED: self._on_auto_rejected,
            EventKind.REVIEW_QUEUED: self._on_review_queued,
            EventKind.LEASED: self._on_leased,
            EventKind.VERDICT: self._on_verdict,
            EventKind.BOX_CREATED: self._on_box_created,
            EventKind.BOX_DELETED: self._on_box_deleted,
            EventKind.ANNOTATION_DONE: self._on_annotation_done,
        }[event.kind]
        return handler(event)

    def _image_in(self, image_id: str, allowed: tuple[Status, ...], kind: EventKind) -> ImageRecord:
        record = self._images.get(image_id)
        if record is None:
            raise UnknownImageError(image_id)
        if record.status not in allowed:
            raise IllegalTransitionError(image_id, record.status.value, kind.value)
        return record

    def _on_image_added(self, event: Event) -> Callable[[], None]:
        p = event.payload
        image_id = p["image_id"]
        if image_id in self._images:
            raise StoreError(f"image {image_id} already present")
        if p["content_hash"] in self._hashes:
            raise StoreError(f"content hash {p['content_hash']} already stored")
        if p["label_id"] not in self._label_ids:
            raise ValidationError(f"label {p['label_id']!r} is not in the configured food list")
        record = ImageRecord(
            image_id=image_id,
            label_id=p["label_id"],
            source_url=p["source_url"],
            rank=int(p["rank"]),
            content_hash=p["content_hash"],
            width_px=int(p["width_px"]),
            height_px=int(p["height_px"]),
            status=Status.FETCHED,
        )

        def mutate():
            self._images[image_id] = record
            self._hashes.add(record.content_hash)

        return mutate

    def _on_scored(self, event: Event) -> Callable[[], None]:
        p = event.payload
        record = self._image_in(p["image_id"], (Status.FETCHED,), event.kind)
        foodness = float(p["foodness"])
        if not 0.0 <= foodness <= 1.0:
            raise ValidationError(f"foodness {foodness} outside [0, 1]")

        def mutate():
            self._images[record.image_id] = record.with_score(foodness)

        return mutate

    def _on_auto_rejected(self, event: Event) -> Callable[[], None]:
        record = self._image_in(event.payload["image_id"], (Status.SCORED,), event.kind)

        def mutate():
            self._images[record.image_id] = record.with_status(Status.AUTO_REJECTED)

        return mutate

    def _on_review_queued(self, event: Event) -> Callable[[], None]:
        record = self._image_in(event.payload["image_id"], (Status.SCORED,), event.kind)

        def mutate():
            self._images[record.image_id] = record.with_status(Status.PENDING_REVIEW)

        return mutate

    def _on_leased(self, event: Event) -> Callable[[], None]:
        p = event.payload
        record = self._image_in(p["image_id"], LEASABLE_STATUSES, event.kind)
        existing = self._leases.get(record.image_id)
        if existing is not None and existing.active(event.at):
            raise StoreError(
                f"image {record.image_id} already leased to {existing.worker_id}"
            )
        lease = TaskLease(
            image_id=record.image_id,
            worker_id=p["worker_id"],
            issued_at=datetime.fromisoformat(p["issued_at"]),
            expires_at=datetime.fromisoformat(p["expires_at"]),
        )
        if lease.expires_at <= lease.issued_at:
            raise ValidationError("lease expiry must follow issue time")

        def mutate():
            self._leases[record.image_id] = lease

        return mutate

    def _on_verdict(self, event: Event) -> Callable[[], None]:
        p = event.payload
        record = self._image_in(p["image_id"], (Status.PENDING_REVIEW,), event.kind)
        decision = p["decision"]
        if decision not in ("KEEP", "NOISY"):
            raise ValidationError(f"unknown verdict decision {decision!r}")
        raw_reason = p.get("noisy_reason")
        if decision == "NOISY" and raw_reason is None:
            raise ValidationError("NOISY verdict requires a noisy_reason")
        if decision == "KEEP" and raw_reason is not None:
            raise ValidationError("KEEP verdict must not carry a noisy_reason")
        if raw_reason is not None and raw_reason not in NoisyReason._value2member_map_:
            raise ValidationError(f"unknown noisy_reason {raw_reason!r}")
        reason = NoisyReason(raw_reason) if raw_reason is not None else None
        elapsed_ms = int(p.get("elapsed_ms", 0))
        if elapsed_ms < 0:
            raise ValidationError("elapsed_ms must be non-negative")

        def mutate():
            if decision == "KEEP":
                self._images[record.image_id] = record.with_status(Status.CONFIRMED)
                # Lease is retained so the same worker can draw boxes next.
            else:
                self._images[record.image_id] = replace(
                    record, status=Status.NOISY_REJECTED, noisy_reason=reason
                )
                self._leases.pop(record.image_id, None)
            self._verdicts.append(
                VerdictRecord(
                    image_id=record.image_id,
                    worker_id=p["worker_id"],
                    decision=decision,
                    noisy_reason=reason,
                    elapsed_ms=elapsed_ms,
                    at=event.at,
                )
            )

        return mutate

    def _on_box_created(self, event: Event) -> Callable[[], None]:
        p = event.payload
        record = self._image_in(p["image_id"], BOXABLE_STATUSES, event.kind)
        box_id = p["box_id"]
        if box_id in self._boxes:
            raise StoreError(f"box {box_id} already exists")
        _check_geometry(p["x"], p["y"], p["w"], p["h"])
        if p["label_id"] not in self._label_ids:
            raise ValidationError(f"label {p['label_id']!r} is not in the configured food list")
        box = BoxAnnotation(
            box_id=box_id,
            image_id=record.image_id,
            x=float(p["x"]),
            y=float(p["y"]),
            w=float(p["w"]),
            h=float(p["h"]),
            label_id=p["label_id"],
            worker_id=p["worker_id"],
            created_at=event.at,
        )

        def mutate():
            self._boxes[box_id] = box

        return mutate

    def _on_box_deleted(self, event: Event) -> Callable[[], None]:
        box_id = event.payload["box_id"]
        box = self._boxes.get(box_id)
        if box is None or box_id in self._deleted_boxes:
            raise StoreError(f"box {box_id} does not exist or is already deleted")
        self._image_in(box.image_id, BOXABLE_STATUSES, event.kind)

        def mutate():
            self._deleted_boxes.add(box_id)

        return mutate

    def _on_annotation_done(self, event: Event) -> Callable[[], None]:
        record = self._image_in(event.payload["image_id"], (Status.CONFIRMED,), event.kind)

        def mutate():
            self._images[record.image_id] = record.with_status(Status.ANNOTATED)
            self._leases.pop(record.image_id, None)

        return mutate

    # ------------------------------------------------------------------
    # Service operations (worker-facing, lease-aware)

    def ingest_manifest(self, records: list[ImageRecord]) -> int:
        """Add pipeline records not yet known to the store, replaying their
        lifecycle up to the manifest status. Idempotent on image_id."""
        added = 0
        with self._lock:
            for record in records:
                if record.image_id in self._images:
                    continue
                if record.status not in (
                    Status.FETCHED,
                    Status.SCORED,
                    Status.AUTO_REJECTED,
                    Status.PENDING_REVIEW,
                ):
                    raise ConfigError(
                        f"manifest record {record.image_id} has post-review status "
                        f"{record.status.value}; ingest from the event log instead"
                    )
                self.append(
                    EventKind.IMAGE_ADDED,
                    {
                        "image_id": record.image_id,
                        "label_id": record.label_id,
                        "source_url": record.source_url,
                        "rank": record.rank,
                        "content_hash": record.content_hash,
                        "width_px": record.width_px,
                        "height_px": record.height_px,
                    },
                )
                if record.status is not Status.FETCHED:
                    self.append(
                        EventKind.SCORED,
                        {"image_id": record.image_id, "foodness": record.foodness},
                    )
                if record.status is Status.AUTO_REJECTED:
                    self.append(EventKind.AUTO_REJECTED, {"image_id": record.image_id})
                elif record.status is Status.PENDING_REVIEW:
                    self.append(EventKind.REVIEW_QUEUED, {"image_id": record.image_id})
                added += 1
        return added

    def lease(self, worker_id: str, now: datetime | None = None) -> TaskLease | None:
        """Grant (or re-serve) the lowest-rank reviewable image.

        A worker holding an active lease gets the same task back; otherwise
        the lowest (rank, label, id) image without an active lease is
        assigned. None when nothing is available.
        """
        with self._lock:
            now = now or self.clock()
            for lease in self._leases.values():
                if (
                    lease.worker_id == worker_id
                    and lease.active(now)
                    and self._images[lease.image_id].status in LEASABLE_STATUSES
                ):
                    return lease

            candidates = sorted(
                (
                    record
                    for record in self._images.values()
                    if record.status in LEASABLE_STATUSES
                    and not self._has_active_lease(record.image_id, now)
                ),
                key=lambda r: (r.rank, r.label_id, r.image_id),
            )
            if not candidates:
                return None
            chosen = candidates[0]
            expires = now + timedelta(seconds=self.lease_ttl)
            self.append(
                EventKind.LEASED,
                {
                    "image_id": chosen.image_id,
                    "worker_id": worker_id,
                    "issued_at": now.isoformat(),
                    "expires_at": expires.isoformat(),
                },
                at=now,
            )
            return self._leases[chosen.image_id]

    def _has_active_lease(self, image_id: str, now: datetime) -> bool:
        lease = self._leases.get(image_id)
        return lease is not None and lease.active(now)

    def _require_lease(self, image_id: str, worker_id: str, now: datetime) -> TaskLease:
        lease = self._leases.get(image_id)
        if lease is None or not lease.active(now) or lease.worker_id != worker_id:
            raise NotLeaseholderError(
                f"worker {worker_id} does not hold the lease on {image_id}"
            )
        return lease

    def record_verdict(
        self,
        image_id: str,
        worker_id: str,
        decision: str,
        noisy_reason: str | None = None,
        elapsed_ms: int = 0,
        now: datetime | None = None,
    ) -> ImageRecord:
        with self._lock:
            now = now or self.clock()
            if image_id not in self._images:
                raise UnknownImageError(image_id)
            self._require_lease(image_id, worker_id, now)
            payload = {
                "image_id": image_id,
                "worker_id": worker_id,
                "decision": decision,
                "elapsed_ms": elapsed_ms,
            }
            if noisy_reason is not None:
                payload["noisy_reason"] = noisy_reason
            self.append(EventKind.VERDICT, payload, at=now)
            return self._images[image_id]

    def add_box(
        self,
        image_id: str,
        worker_id: str,
        x: float,
        y: float,
        w: float,
        h: float,
        label_id: str | None = None,
        now: datetime | None = None,
    ) -> BoxAnnotation:
        with self._lock:
            now = now or self.clock()
            record = self._images.get(image_id)
            if record is None:
                raise UnknownImageError(image_id)
            self._require_lease(image_id, worker_id, now)
            box_id = f"box-{self._last_seq + 1:08d}"
            self.append(
                EventKind.BOX_CREATED,
                {
                    "box_id": box_id,
                    "image_id": image_id,
                    "x": x,
                    "y": y,
                    "w": w,
                    "h": h,
                    # The crawl label is the reference label when none given.
                    "label_id": label_id if label_id is not None else record.label_id,
                    "worker_id": worker_id,
                },
                at=now,
            )
            return self._boxes[box_id]

    def delete_box(self, box_id: str, worker_id: str, now: datetime | None = None) -> None:
        with self._lock:
            now = now or self.clock()
            box = self._boxes.get(box_id)
            if box is None or box_id in self._deleted_boxes:
                raise StoreError(f"box {box_id} does not exist or is already deleted")
            self._require_lease(box.image_id, worker_id, now)
            self.append(
                EventKind.BOX_DELETED,
                {"box_id": box_id, "image_id": box.image_id, "worker_id": worker_id},
                at=now,
            )

    def mark_done(self, image_id: str, worker_id: str, now: datetime | None = None) -> ImageRecord:
        with self._lock:
            now = now or self.clock()
            if image_id not in self._images:
                raise UnknownImageError(image_id)
            self._require_lease(image_id, worker_id, now)
            self.append(
                EventKind.ANNOTATION_DONE,
                {"image_id": image_id, "worker_id": worker_id},
                at=now,
            )
            return self._images[image_id]

    # ------------------------------------------------------------------
    # Queries

    def image(self, image_id: str) -> ImageRecord:
        with self._lock:
            record = self._images.get(image_id)
            if record is None:
                raise UnknownImageError(image_id)
            return record

    def has_image(self, image_id: str) -> bool:
        with self._lock:
            return image_id in self._images

    def images(self, status: Status | None = None) -> list[ImageRecord]:
        with self._lock:
            records = list(self._images.values())
        if status is not None:
            records = [r for r in records if r.status is status]
        return sorted(records, key=lambda r: (r.label_id, r.rank, r.image_id))

    def live_boxes(self, image_id: str | None = None) -> list[BoxAnnotation]:
        with self._lock:
            boxes = [
                box
                for box_id, box in self._boxes.items()
                if box_id not in self._deleted_boxes
                and (image_id is None or box.image_id == image_id)
            ]
        return boxes

    def box(self, box_id: str) -> BoxAnnotation | None:
        with self._lock:
            if box_id in self._deleted_boxes:
                return None
            return self._boxes.get(box_id)

    def lease_for(self, image_id: str, now: datetime | None = None) -> TaskLease | None:
        with self._lock:
            now = now or self.clock()
            lease = self._leases.get(image_id)
            return lease if lease is not None and lease.active(now) else None

    def verdicts(self) -> list[VerdictRecord]:
        with self._lock:
            return list(self._verdicts)

    def review_ms_summary(self) -> dict:
        with self._lock:
            samples = [v.elapsed_ms for v in self._verdicts]
        if not samples:
            return {"count": 0, "median_ms": None}
        return {"count": len(samples), "median_ms": statistics.median(samples)}

    def stats(self) -> StatsReport:
        """Per-label image and live-box counts, in configured label order.

        Images count toward the label they were crawled for once uploaded
        for review; boxes count toward the label the annotator gave them.
        """
        with self._lock:
            image_counts = {label.id: 0 for label in self.labels}
            box_counts = {label.id: 0 for label in self.labels}
            for record in self._images.values():
                if record.status in UPLOADED_STATUSES:
                    image_counts[record.label_id] += 1
            for box_id, box in self._boxes.items():
                if box_id not in self._deleted_boxes:
                    box_counts[box.label_id] += 1
        rows = tuple(
            LabelStats(
                label_id=label.id,
                label_text=label.text,
                image_count=image_counts[label.id],
                box_count=box_counts[label.id],
            )
            for label in self.labels
        )
        return StatsReport(
            rows=rows,
            total_images=sum(r.image_count for r in rows),
            total_boxes=sum(r.box_count for r in rows),
        )

    # ------------------------------------------------------------------
    # Persistence

    def export_state(self) -> dict:
        """Canonical state dump used for snapshots and replay-equality
        checks."""
        with self._lock:
            return {
                "last_seq": self._last_seq,
                "images": [
                    json.loads(self._images[key].to_json())
                    for key in sorted(self._images)
                ],
                "boxes": [
                    {
                        "box_id": box.box_id,
                        "image_id": box.image_id,
                        "x": box.x,
                        "y": box.y,
                        "w": box.w,
                        "h": box.h,
                        "label_id": box.label_id,
                        "worker_id": box.worker_id,
                        "created_at": box.created_at.isoformat(),
                        "live": box_id not in self._deleted_boxes,
                    }
                    for box_id, box in sorted(self._boxes.items())
                ],
                "leases": [
                    {
                        "image_id": lease.image_id,
                        "worker_id": lease.worker_id,
                        "issued_at": lease.issued_at.isoformat(),
                        "expires_at": lease.expires_at.isoformat(),
                    }
                    for _, lease in sorted(self._leases.items())
                ],
                "verdicts": [
                    {
                        "image_id": v.image_id,
                        "worker_id": v.worker_id,
                        "decision": v.decision,
                        "noisy_reason": v.noisy_reason.value if v.noisy_reason else None,
                        "elapsed_ms": v.elapsed_ms,
                        "at": v.at.isoformat(),
                    }
                    for v in self._verdicts
                ],
            }

    def write_snapshot(self) -> Path:
        if self.root is None:
            raise StoreError("snapshots need a persistent store root")
        with self._lock:
            state = self.export_state()
            path = self.root / f"snapshot-{self._last_seq:012d}.json"
        tmp = path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(state, fh, sort_keys=True, separators=(",", ":"))
        os.replace(tmp, path)
        return path

    def _restore_state(self, state: dict) -> None:
        self._images = {}
        self._hashes = set()
        for raw in state["images"]:
            record = ImageRecord.from_json(json.dumps(raw))
            self._images[record.image_id] = record
            self._hashes.add(record.content_hash)
        self._boxes = {}
        self._deleted_boxes = set()
        for raw in state["boxes"]:
            box = BoxAnnotation(
                box_id=raw["box_id"],
                image_id=raw["image_id"],
                x=raw["x"],
                y=raw["y"],
                w=raw["w"],
                h=raw["h"],
                label_id=raw["label_id"],
                worker_id=raw["worker_id"],
                created_at=datetime.fromisoformat(raw["created_at"]),
            )
            self._boxes[box.box_id] = box
            if not raw["live"]:
                self._deleted_boxes.add(box.box_id)
        self._leases = {
            raw["image_id"]: TaskLease(
                image_id=raw["image_id"],
                worker_id=raw["worker_id"],
                issued_at=datetime.fromisoformat(raw["issued_at"]),
                expires_at=datetime.fromisoformat(raw["expires_at"]),
            )
            for raw in state["leases"]
        }
        self._verdicts = [
            VerdictRecord(
                image_id=raw["image_id"],
                worker_id=raw["worker_id"],
                decision=raw["decision"],
                noisy_reason=NoisyReason(raw["noisy_reason"]) if raw["noisy_reason"] else None,
                elapsed_ms=raw["elapsed_ms"],
                at=datetime.fromisoformat(raw["at"]),
            )
            for raw in state["verdicts"]
        ]
        self._last_seq = state["last_seq"]

    def _replay_from_disk(self) -> None:
        snapshots = sorted(self.root.glob("snapshot-*.json"))
        if snapshots:
            with open(snapshots[-1], encoding="utf-8") as fh:
                self._restore_state(json.load(fh))
        log_path = self.root / LOG_FILE
        if log_path.exists():
            for event in read_event_log(log_path, after_seq=self._last_seq):
                self._apply(event, persist=False)

    def close(self) -> None:
        with self._lock:
            if self._log_handle is not None:
                self._log_handle.close()
                self._log_handle = None
