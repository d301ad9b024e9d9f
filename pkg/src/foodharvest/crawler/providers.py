"""Search providers: where ranked image URLs come from.

Live image-search scraping is brittle and terms-of-service sensitive, so
the provider is an interface. The fixture provider (a directory served
over local HTTP with a deterministic ranking file) is the reproducible
target for tests and demos; a live adapter can be slotted in without
touching the crawl loop.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Protocol

from ..errors import FetchError, ProviderUnreachableError
from ..manifest import SearchLabel
from .fetch import RateLimitedFetcher

RANKING_FILE = "ranking.json"


@dataclass(frozen=True)
class ProviderPage:
    """One page of (source_url, provider_rank) results, ranks strictly
    increasing across all pages of a query."""

    results: tuple[tuple[str, int], ...]
    next_cursor: str | None = None


class SearchProvider(Protocol):
    def search(self, label: SearchLabel, cursor: str | None = None) -> ProviderPage: ...


class FixtureProvider:
    """Ranked results read from `ranking.json` at the site root: a JSON
    object mapping label id to an ordered list of relative image paths."""

    def __init__(self, base_url: str, fetcher: RateLimitedFetcher, page_size: int = 50):
        self.base_url = base_url.rstrip("/")
        self.fetcher = fetcher
        self.page_size = page_size
        self._rankings: dict[str, list[str]] | None = None

    def _load_rankings(self) -> dict[str, list[str]]:
        if self._rankings is None:
            url = f"{self.base_url}/{RANKING_FILE}"
            try:
                raw = self.fetcher.fetch(url)
            except FetchError as exc:
                raise ProviderUnreachableError(f"cannot read ranking file: {exc}")
            self._rankings = json.loads(raw.decode("utf-8"))
        return self._rankings

    def search(self, label: SearchLabel, cursor: str | None = None) -> ProviderPage:
        paths = self._load_rankings().get(label.id, [])
        offset = int(cursor) if cursor else 0
        page = paths[offset : offset + self.page_size]
        results = tuple(
            (f"{self.base_url}/{path}", offset + i + 1) for i, path in enumerate(page)
        )
        next_offset = offset + len(page)
        next_cursor = str(next_offset) if next_offset < len(paths) else None
        return ProviderPage(results=results, next_cursor=next_cursor)


class LiveProvider:
    """Placeholder for a real image-search adapter. Querying a production
    search engine needs API credentials and markup parsing that do not
    belong in this repository's test surface."""

    def __init__(self, *args, **kwargs):
        raise NotImplementedError(
            "the live search adapter is a stub; use the fixture provider or "
            "implement SearchProvider against your search API"
        )
