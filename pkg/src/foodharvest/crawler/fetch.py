"""Per-host rate limiting and size-capped downloads."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from urllib.parse import urlsplit

import httpx

from ..errors import FetchError

DEFAULT_BODY_CAP = 20 * 1024 * 1024


class HostRateLimiter:
    """Token-bucket politeness: requests to one host are spaced by at least
    min_interval, measured between actual send times; distinct hosts never
    block each other.

    Thread-safe. Send stamps are retained per host so a crawl can audit the
    gaps it actually produced.
    """

    def __init__(self, min_interval: float, clock=time.monotonic, sleep=time.sleep):
        if min_interval < 0:
            raise ValueError("min_interval must be >= 0")
        self.min_interval = min_interval
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._last: dict[str, float] = {}
        self._stamps: dict[str, list[float]] = {}

    @classmethod
    def per_second(cls, rate: float, **kwargs) -> "HostRateLimiter":
        if rate <= 0:
            raise ValueError("rate must be positive")
        return cls(1.0 / rate, **kwargs)

    def acquire(self, host: str) -> float:
        """Block until a request to host is allowed; returns the send stamp."""
        while True:
            with self._lock:
                now = self._clock()
                last = self._last.get(host)
                if last is None or now - last >= self.min_interval:
                    self._last[host] = now
                    self._stamps.setdefault(host, []).append(now)
                    return now
                wait = last + self.min_interval - now
            self._sleep(wait)

    def stamps(self, host: str) -> list[float]:
        with self._lock:
            return list(self._stamps.get(host, ()))


@dataclass
class RateLimitedFetcher:
    """GETs a URL through the per-host limiter, enforcing the body cap."""

    limiter: HostRateLimiter
    timeout: float = 20.0
    body_cap: int = DEFAULT_BODY_CAP
    _client: httpx.Client = field(init=False, repr=False)

    def __post_init__(self):
        self._client = httpx.Client(timeout=self.timeout, follow_redirects=True)

    def fetch(self, url: str) -> bytes:
        host = urlsplit(url).netloc
        if not host:
            raise FetchError(url, "no host in URL")
        self.limiter.acquire(host)
        try:
            with self._client.stream("GET", url) as response:
                if response.status_code != 200:
                    raise FetchError(
                        url,
                        f"status {response.status_code}",
                        retryable=response.status_code >= 500,
                    )
                declared = response.headers.get("content-length")
                if declared and int(declared) > self.body_cap:
                    raise FetchError(url, f"declared body {declared} exceeds cap")
                chunks = []
                size = 0
                for chunk in response.iter_bytes():
                    size += len(chunk)
                    if size > self.body_cap:
                        raise FetchError(url, f"body exceeds {self.body_cap} byte cap")
                    chunks.append(chunk)
                return b"".join(chunks)
        except httpx.TimeoutException as exc:
            raise FetchError(url, f"timeout: {exc}", retryable=True)
        except httpx.HTTPError as exc:
            raise FetchError(url, str(exc), retryable=True)

    def close(self):
        self._client.close()
