"""The annotation HTTP service.

All mutating endpoints identify the worker via the `worker` query parameter
and are authorized against the image's current lease; every mutation maps
to exactly one store event, so the HTTP layer holds no state of its own.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..annostore import AnnotationStore
from ..crawler.crawl import ImageStore
from ..errors import (
    IllegalTransitionError,
    NotLeaseholderError,
    StoreError,
    UnknownImageError,
    ValidationError,
)
from ..manifest import Status
from .export import export_coco, export_json_bytes, to_pixel_box
from .tutorial import load_tutorial, tutorial_etag

_MEDIA_TYPES = {
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".gif": "image/gif",
    ".webp": "image/webp",
    ".bmp": "image/bmp",
}

_PLACEHOLDER_HTML = """<!doctype html>
<html><head><title>foodharvest</title></head>
<body>
<h1>foodharvest annotation service</h1>
<p>No web client build found. The JSON API is live under <code>/api</code>;
build the frontend (see README) to get the review and annotation screens.</p>
</body></html>
"""


class VerdictBody(BaseModel):
    decision: str
    noisy_reason: str | None = None
    elapsed_ms: int = 0


class BoxBody(BaseModel):
    x: float
    y: float
    w: float
    h: float
    label_id: str | None = None


def create_app(
    store: AnnotationStore,
    image_store: ImageStore | None = None,
    tutorial_path: Path | str | None = None,
    static_dir: Path | str | None = None,
) -> FastAPI:
    app = FastAPI(title="foodharvest annotation service")
    tutorial_document = load_tutorial(tutorial_path)
    tutorial_hash = tutorial_etag(tutorial_document)
    food_list = [{"id": label.id, "text": label.text} for label in store.labels]

    def error_handler(status_code: int):
        def handler(request: Request, exc: Exception):
            return JSONResponse(status_code=status_code, content={"detail": str(exc)})

        return handler

    app.add_exception_handler(UnknownImageError, error_handler(404))
    app.add_exception_handler(NotLeaseholderError, error_handler(409))
    app.add_exception_handler(IllegalTransitionError, error_handler(409))
    app.add_exception_handler(ValidationError, error_handler(422))
    app.add_exception_handler(StoreError, error_handler(409))

    def task_view(image_id: str) -> dict:
        record = store.image(image_id)
        phase = "REVIEW" if record.status is Status.PENDING_REVIEW else "ANNOTATE"
        lease = store.lease_for(image_id)
        return {
            "image_id": record.image_id,
            "image_url": f"/images/{record.content_hash}",
            "width_px": record.width_px,
            "height_px": record.height_px,
            "reference_label": record.label_id,
            "food_list": food_list,
            "existing_boxes": [
                {
                    "box_id": box.box_id,
                    "x": box.x,
                    "y": box.y,
                    "w": box.w,
                    "h": box.h,
                    "label_id": box.label_id,
                }
                for box in store.live_boxes(image_id)
            ],
            "phase": phase,
            "lease_expires_at": lease.expires_at.isoformat() if lease else None,
        }

    @app.get("/api/tasks/next")
    def next_task(worker: str = ""):
        if not worker:
            return JSONResponse(status_code=400, content={"detail": "worker is required"})
        lease = store.lease(worker)
        if lease is None:
            return Response(status_code=204)
        return task_view(lease.image_id)

    @app.post("/api/images/{image_id}/verdict")
    def post_verdict(image_id: str, body: VerdictBody, worker: str = ""):
        if not worker:
            return JSONResponse(status_code=400, content={"detail": "worker is required"})
        record = store.record_verdict(
            image_id,
            worker,
            body.decision,
            noisy_reason=body.noisy_reason,
            elapsed_ms=body.elapsed_ms,
        )
        return {
            "image_id": image_id,
            "status": record.status.value,
            "phase": "ANNOTATE" if record.status is Status.CONFIRMED else None,
        }

    @app.post("/api/images/{image_id}/boxes", status_code=201)
    def post_box(image_id: str, body: BoxBody, worker: str = ""):
        if not worker:
            return JSONResponse(status_code=400, content={"detail": "worker is required"})
        box = store.add_box(
            image_id, worker, body.x, body.y, body.w, body.h, label_id=body.label_id
        )
        record = store.image(image_id)
        x_px, y_px, w_px, h_px = to_pixel_box(box, record.width_px, record.height_px)
        return {
            "box_id": box.box_id,
            "label_id": box.label_id,
            "crop": {"x_px": x_px, "y_px": y_px, "w_px": w_px, "h_px": h_px},
        }

    @app.delete("/api/boxes/{box_id}")
    def delete_box(box_id: str, worker: str = ""):
        if not worker:
            return JSONResponse(status_code=400, content={"detail": "worker is required"})
        if store.box(box_id) is None:
            return JSONResponse(status_code=404, content={"detail": f"unknown box {box_id}"})
        store.delete_box(box_id, worker)
        return {"box_id": box_id, "deleted": True}

    @app.post("/api/images/{image_id}/done")
    def post_done(image_id: str, worker: str = ""):
        if not worker:
            return JSONResponse(status_code=400, content={"detail": "worker is required"})
        record = store.mark_done(image_id, worker)
        return {"image_id": image_id, "status": record.status.value}

    @app.get("/api/stats")
    def get_stats():
        report = store.stats()
        return {
            "rows": [
                {
                    "label_id": row.label_id,
                    "label_text": row.label_text,
                    "image_count": row.image_count,
                    "box_count": row.box_count,
                }
                for row in report.rows
            ],
            "total_images": report.total_images,
            "total_boxes": report.total_boxes,
            "review": store.review_ms_summary(),
        }

    @app.get("/api/export")
    def get_export(format: str = "coco"):
        if format != "coco":
            return JSONResponse(
                status_code=422, content={"detail": f"unknown export format {format!r}"}
            )
        manifest = export_coco(store, image_store)
        return Response(content=export_json_bytes(manifest), media_type="application/json")

    @app.get("/api/tutorial")
    def get_tutorial():
        return JSONResponse(content=tutorial_document, headers={"ETag": tutorial_hash})

    @app.get("/images/{content_hash}")
    def get_image(content_hash: str):
        if image_store is not None:
            path = image_store.path_for(content_hash)
            if path is not None:
                media = _MEDIA_TYPES.get(path.suffix.lower(), "application/octet-stream")
                return FileResponse(path, media_type=media)
        return JSONResponse(status_code=404, content={"detail": "image not found"})

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def placeholder():
            return _PLACEHOLDER_HTML

    return app
