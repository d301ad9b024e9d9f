"""Tutorial content shown to annotators before and during the task."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ..errors import ConfigError

_BUILTIN = {
    "title": "How to review crawled food images",
    "criteria": [
        {
            "kind": "IRRELEVANT",
            "text": (
                "Reject an image as irrelevant when no food item matching the "
                "reference label is visible: menus, logos, restaurant exteriors, "
                "packaging, drawings, or unrelated subjects."
            ),
        },
        {
            "kind": "AESTHETIC",
            "text": (
                "Reject an image as aesthetic when it is a staged or retouched "
                "professional shot whose textures, colors, angle, or layout do "
                "not resemble an everyday snapshot of a meal."
            ),
        },
        {
            "kind": "KEEP",
            "text": (
                "Keep an image when the reference food is present and the photo "
                "looks like something a person would casually capture before eating."
            ),
        },
    ],
    "pairs": [
        {
            "kind": "IRRELEVANT",
            "keep_example": "A plate of doughnuts on a kitchen table.",
            "reject_example": "A bakery storefront with no visible food.",
        },
        {
            "kind": "AESTHETIC",
            "keep_example": "A half-eaten waffle photographed with a phone.",
            "reject_example": "A studio-lit waffle tower with styled syrup drips.",
        },
    ],
    "shortcuts": {"keep": "K", "noisy_irrelevant": "I", "noisy_aesthetic": "A"},
}


def builtin_tutorial() -> dict:
    return json.loads(json.dumps(_BUILTIN))


def load_tutorial(path: Path | str | None) -> dict:
    """Configured tutorial document, or the built-in placeholder when no
    path is given or the file is absent."""
    if path is None:
        return builtin_tutorial()
    path = Path(path)
    if not path.exists():
        return builtin_tutorial()
    with open(path, encoding="utf-8") as fh:
        document = json.load(fh)
    if "pairs" not in document or not document["pairs"]:
        raise ConfigError(f"tutorial file {path} must define at least one example pair")
    return document


def tutorial_etag(document: dict) -> str:
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
