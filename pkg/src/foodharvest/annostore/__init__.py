"""Durable annotation state: an append-only event log folded into the image
lifecycle, verdicts, bounding boxes, and task leases."""

from .events import Event, EventKind, read_event_log
from .store import (
    AnnotationStore,
    BoxAnnotation,
    LabelStats,
    StatsReport,
    TaskLease,
    VerdictRecord,
)

__all__ = [
    "AnnotationStore",
    "BoxAnnotation",
    "Event",
    "EventKind",
    "LabelStats",
    "StatsReport",
    "TaskLease",
    "VerdictRecord",
    "read_event_log",
]
