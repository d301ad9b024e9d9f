"""HTTP annotation service: task leasing, verdicts, box CRUD, stats,
tutorial, and dataset export for the browser client and batch tooling."""

from .app import create_app
from .export import export_coco, export_json_bytes, import_coco, to_pixel_box
from .tutorial import builtin_tutorial, load_tutorial

__all__ = [
    "builtin_tutorial",
    "create_app",
    "export_coco",
    "export_json_bytes",
    "import_coco",
    "load_tutorial",
    "to_pixel_box",
]
