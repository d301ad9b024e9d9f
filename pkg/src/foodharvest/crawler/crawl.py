"""Crawl loop: ranked results in, deduplicated image records out."""

from __future__ import annotations

import hashlib
import io
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image

from ..errors import ConfigError, FetchError
from ..manifest import ImageRecord, SearchLabel, Status
from .fetch import RateLimitedFetcher
from .providers import SearchProvider

logger = logging.getLogger(__name__)

_EXT_BY_FORMAT = {"JPEG": "jpg", "PNG": "png", "GIF": "gif", "WEBP": "webp", "BMP": "bmp"}


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def dedup(candidates: list[tuple[str, bytes]]) -> list[tuple[str, bytes]]:
    """Stable filter keeping the first occurrence of each content hash."""
    seen: set[str] = set()
    kept = []
    for url, data in candidates:
        digest = content_hash(data)
        if digest not in seen:
            seen.add(digest)
            kept.append((url, data))
    return kept


class ImageStore:
    """Content-addressed image files: `<content_hash>.<ext>` under root."""

    def __init__(self, root: Path | str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def save(self, digest: str, data: bytes, ext: str) -> Path:
        path = self.root / f"{digest}.{ext}"
        if not path.exists():
            tmp = path.with_suffix(path.suffix + ".tmp")
            tmp.write_bytes(data)
            tmp.replace(path)
        return path

    def path_for(self, digest: str) -> Path | None:
        matches = sorted(self.root.glob(f"{digest}.*"))
        return matches[0] if matches else None

    def load(self, digest: str) -> bytes:
        path = self.path_for(digest)
        if path is None:
            raise FileNotFoundError(f"no stored image for hash {digest}")
        return path.read_bytes()


@dataclass
class CrawlSession:
    """State shared across the labels of one collection run.

    Guards the cross-label uniqueness sets so multiple worker threads can
    drive crawls; a single manifest writer stays with the caller.
    """

    store: ImageStore
    fetcher: RateLimitedFetcher
    known_hashes: set[str] = field(default_factory=set)
    taken_ids: set[str] = field(default_factory=set)
    fetched_urls: set[str] = field(default_factory=set)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def claim_url(self, url: str) -> bool:
        with self._lock:
            if url in self.fetched_urls:
                return False
            self.fetched_urls.add(url)
            return True

    def claim_hash(self, digest: str) -> bool:
        with self._lock:
            if digest in self.known_hashes:
                return False
            self.known_hashes.add(digest)
            return True

    def assign_image_id(self, digest: str) -> str:
        """Short stable id from the hash; extended only on prefix collision."""
        with self._lock:
            width = 16
            while f"img-{digest[:width]}" in self.taken_ids and width < len(digest):
                width += 4
            image_id = f"img-{digest[:width]}"
            self.taken_ids.add(image_id)
            return image_id


def _decode_dimensions(data: bytes) -> tuple[int, int, str] | None:
    try:
        image = Image.open(io.BytesIO(data))
        width, height = image.size
        ext = _EXT_BY_FORMAT.get(image.format or "", (image.format or "bin").lower())
        return width, height, ext
    except Exception:
        return None


def crawl(
    label: SearchLabel,
    max_count: int,
    provider: SearchProvider,
    session: CrawlSession,
) -> list[ImageRecord]:
    """Fetch ranked results for one label until max_count unique, decodable
    images are stored.

    Per-image failures (download errors, undecodable bytes) are logged and
    skipped; ranks of kept records are renumbered 1..n in provider order.
    """
    if max_count < 1:
        raise ConfigError(f"max_count must be >= 1, got {max_count}")

    records: list[ImageRecord] = []
    cursor: str | None = None
    while len(records) < max_count:
        page = provider.search(label, cursor)
        for url, provider_rank in page.results:
            if len(records) >= max_count:
                break
            if not session.claim_url(url):
                continue
            try:
                data = session.fetcher.fetch(url)
            except FetchError as exc:
                logger.warning("skipping %s (rank %d): %s", url, provider_rank, exc)
                continue
            decoded = _decode_dimensions(data)
            if decoded is None:
                logger.warning("skipping %s: undecodable image", url)
                continue
            width, height, ext = decoded
            digest = content_hash(data)
            if not session.claim_hash(digest):
                logger.debug("skipping %s: duplicate of stored content", url)
                continue
            session.store.save(digest, data, ext)
            records.append(
                ImageRecord(
                    image_id=session.assign_image_id(digest),
                    label_id=label.id,
                    source_url=url,
                    rank=len(records) + 1,
                    content_hash=digest,
                    width_px=width,
                    height_px=height,
                    status=Status.FETCHED,
                )
            )
        if page.next_cursor is None or len(records) >= max_count:
            break
        cursor = page.next_cursor
    return records
