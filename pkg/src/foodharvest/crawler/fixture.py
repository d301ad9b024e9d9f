"""Local fixture site: a directory of images served over HTTP.

Used by tests and by `collect --provider fixture`. The corpus builder
plants exact byte-duplicates so deduplication has something to do.
"""

from __future__ import annotations

import io
import json
import random
import threading
from functools import partial
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from PIL import Image

from ..manifest import SearchLabel
from .providers import RANKING_FILE


class _QuietHandler(SimpleHTTPRequestHandler):
    def log_message(self, format, *args):  # noqa: A002 - stdlib signature
        pass


class FixtureSite:
    """Serves a directory on an ephemeral localhost port.

    Usable as a context manager; `base_url` is valid between start and stop.
    """

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    @property
    def base_url(self) -> str:
        if self._server is None:
            raise RuntimeError("fixture site is not running")
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def start(self) -> "FixtureSite":
        handler = partial(_QuietHandler, directory=str(self.root))
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None
            self._thread = None

    def __enter__(self) -> "FixtureSite":
        return self.start()

    def __exit__(self, *exc_info):
        self.stop()


def _tiny_png(rng: random.Random, size: tuple[int, int] = (8, 8)) -> bytes:
    color = (rng.randrange(256), rng.randrange(256), rng.randrange(256))
    image = Image.new("RGB", size, color)
    # A second pixel of entropy avoids accidental collisions between draws.
    image.putpixel((0, 0), (rng.randrange(256), rng.randrange(256), rng.randrange(256)))
    buffer = io.BytesIO()
    image.save(buffer, format="PNG")
    return buffer.getvalue()


def build_fixture_corpus(
    root: Path | str,
    labels: list[SearchLabel],
    count_per_label: int,
    duplicate_count: int = 0,
    seed: int = 0,
) -> dict[str, list[str]]:
    """Write a ranked corpus under root and return the ranking mapping.

    Each label gets count_per_label files of which duplicate_count are byte
    copies of earlier files in the same ranking (distinct URLs, identical
    content).
    """
    if duplicate_count >= count_per_label:
        raise ValueError("duplicate_count must be smaller than count_per_label")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    rankings: dict[str, list[str]] = {}

    for label in labels:
        label_dir = root / label.id
        label_dir.mkdir(exist_ok=True)
        duplicate_slots = set(
            rng.sample(range(1, count_per_label), duplicate_count)
        )
        paths: list[str] = []
        originals: list[bytes] = []
        for i in range(count_per_label):
            if i in duplicate_slots and originals:
                data = originals[rng.randrange(len(originals))]
            else:
                data = _tiny_png(rng)
                originals.append(data)
            rel = f"{label.id}/img_{i:04d}.png"
            (root / rel).write_bytes(data)
            paths.append(rel)
        rankings[label.id] = paths

    with open(root / RANKING_FILE, "w", encoding="utf-8") as fh:
        json.dump(rankings, fh, indent=0, sort_keys=True)
    return rankings
