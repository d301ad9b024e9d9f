"""Polite, deduplicating image crawler behind a pluggable search provider."""

from .crawl import CrawlSession, ImageStore, crawl, dedup
from .fetch import HostRateLimiter, RateLimitedFetcher
from .providers import FixtureProvider, LiveProvider, ProviderPage, SearchProvider
from .fixture import FixtureSite, build_fixture_corpus

__all__ = [
    "CrawlSession",
    "FixtureProvider",
    "FixtureSite",
    "HostRateLimiter",
    "ImageStore",
    "LiveProvider",
    "ProviderPage",
    "RateLimitedFetcher",
    "SearchProvider",
    "build_fixture_corpus",
    "crawl",
    "dedup",
]
