"""Dataset export in a COCO-style layout, and its inverse.

Only ANNOTATED images and live boxes are exported. Ordering is fully
deterministic (images by id, annotations by image then creation order) so
export -> import -> export reproduces the manifest byte for byte.
"""

from __future__ import annotations

import json
import math

from ..annostore import AnnotationStore, EventKind
from ..annostore.store import BoxAnnotation
from ..crawler.crawl import ImageStore
from ..errors import ConfigError
from ..manifest import ImageRecord, SearchLabel, Status

FALLBACK_EXT = "img"


def _half_up(value: float) -> int:
    return math.floor(value + 0.5)


def to_pixel_box(
    box: BoxAnnotation | None,
    width_px: int,
    height_px: int,
    x: float | None = None,
    y: float | None = None,
    w: float | None = None,
    h: float | None = None,
) -> tuple[int, int, int, int]:
    """Normalized rectangle to absolute pixels, rounded half-up and clamped
    so the result stays inside the image with at least 1 px extent."""
    if box is not None:
        x, y, w, h = box.x, box.y, box.w, box.h
    x_px = min(_half_up(x * width_px), width_px - 1)
    y_px = min(_half_up(y * height_px), height_px - 1)
    w_px = max(1, _half_up(w * width_px))
    h_px = max(1, _half_up(h * height_px))
    w_px = min(w_px, width_px - x_px)
    h_px = min(h_px, height_px - y_px)
    return x_px, y_px, w_px, h_px


def _file_name(record: ImageRecord, image_store: ImageStore | None) -> str:
    if image_store is not None:
        path = image_store.path_for(record.content_hash)
        if path is not None:
            return path.name
    return f"{record.content_hash}.{FALLBACK_EXT}"


def export_coco(store: AnnotationStore, image_store: ImageStore | None = None) -> dict:
    """Materialize the annotated dataset: images, pixel-space boxes, and the
    full configured category list."""
    categories = [
        {"id": i + 1, "name": label.id, "display_name": label.text}
        for i, label in enumerate(store.labels)
    ]
    category_ids = {label.id: i + 1 for i, label in enumerate(store.labels)}

    annotated = sorted(
        (r for r in store.images() if r.status is Status.ANNOTATED),
        key=lambda r: r.image_id,
    )
    images = [
        {
            "id": record.image_id,
            "file_name": _file_name(record, image_store),
            "width": record.width_px,
            "height": record.height_px,
        }
        for record in annotated
    ]

    by_image = {record.image_id: record for record in annotated}
    boxes = sorted(
        (b for b in store.live_boxes() if b.image_id in by_image),
        key=lambda b: (b.image_id, b.box_id),
    )
    annotations = []
    for i, box in enumerate(boxes):
        record = by_image[box.image_id]
        x_px, y_px, w_px, h_px = to_pixel_box(box, record.width_px, record.height_px)
        annotations.append(
            {
                "id": i + 1,
                "image_id": box.image_id,
                "category_id": category_ids[box.label_id],
                "label_id": box.label_id,
                "bbox": [x_px, y_px, w_px, h_px],
                "area": w_px * h_px,
            }
        )

    return {"images": images, "annotations": annotations, "categories": categories}


def export_json_bytes(manifest: dict) -> bytes:
    return (json.dumps(manifest, sort_keys=True, indent=2) + "\n").encode("utf-8")


def import_coco(manifest: dict, labels: list[SearchLabel] | None = None) -> AnnotationStore:
    """Rebuild an in-memory store whose annotated content matches the
    manifest (the crawl-time metadata not present in an export is
    synthesized and does not affect a re-export)."""
    if labels is None:
        labels = [
            SearchLabel(id=c["name"], text=c.get("display_name", c["name"]))
            for c in manifest["categories"]
        ]
    label_by_category = {c["id"]: c["name"] for c in manifest["categories"]}
    if not labels:
        raise ConfigError("manifest carries no categories")

    store = AnnotationStore(labels)
    boxes_by_image: dict[str, list[dict]] = {}
    for ann in manifest["annotations"]:
        boxes_by_image.setdefault(ann["image_id"], []).append(ann)

    for rank, image in enumerate(sorted(manifest["images"], key=lambda m: m["id"]), start=1):
        image_id = image["id"]
        anns = sorted(boxes_by_image.get(image_id, []), key=lambda a: a["id"])
        label_id = (
            label_by_category[anns[0]["category_id"]] if anns else labels[0].id
        )
        content_hash = image["file_name"].rsplit(".", 1)[0]
        store.append(
            EventKind.IMAGE_ADDED,
            {
                "image_id": image_id,
                "label_id": label_id,
                "source_url": f"import://{image['file_name']}",
                "rank": rank,
                "content_hash": content_hash,
                "width_px": image["width"],
                "height_px": image["height"],
            },
        )
        store.append(EventKind.SCORED, {"image_id": image_id, "foodness": 1.0})
        store.append(EventKind.REVIEW_QUEUED, {"image_id": image_id})
        store.append(
            EventKind.VERDICT,
            {"image_id": image_id, "worker_id": "import", "decision": "KEEP", "elapsed_ms": 0},
        )
        for ann in anns:
            x_px, y_px, w_px, h_px = ann["bbox"]
            store.append(
                EventKind.BOX_CREATED,
                {
                    "box_id": f"box-{store.last_seq + 1:08d}",
                    "image_id": image_id,
                    "x": x_px / image["width"],
                    "y": y_px / image["height"],
                    "w": w_px / image["width"],
                    "h": h_px / image["height"],
                    "label_id": label_by_category[ann["category_id"]],
                    "worker_id": "import",
                },
            )
        store.append(EventKind.ANNOTATION_DONE, {"image_id": image_id, "worker_id": "import"})
    return store
