"""Exception types shared across the pipeline stages."""


class FoodharvestError(Exception):
    """Base class for all typed errors raised by this package."""

    retryable = False


class ConfigError(FoodharvestError):
    """Invalid configuration, labels file, or CLI arguments."""


class FetchError(FoodharvestError):
    """A download failed (timeout, bad status, oversize body)."""

    def __init__(self, url: str, reason: str, retryable: bool = False):
        super().__init__(f"fetch failed for {url}: {reason}")
        self.url = url
        self.reason = reason
        self.retryable = retryable


class ProviderUnreachableError(FoodharvestError):
    """The search provider could not be contacted."""

    retryable = True


class UndecodableImageError(FoodharvestError):
    """Image bytes could not be decoded by Pillow."""


class BackendUnavailableError(FoodharvestError):
    """The detector backend could not produce a result."""

    retryable = True


class MissingScoreError(FoodharvestError):
    """A record that should carry a foodness score does not."""

    def __init__(self, image_id: str):
        super().__init__(f"record {image_id} has no foodness score")
        self.image_id = image_id


class PoolTooSmallError(FoodharvestError):
    """A labeled score pool cannot supply the requested stratum size."""


class IllegalTransitionError(FoodharvestError):
    """An event is not legal for the image's current lifecycle status."""

    def __init__(self, image_id: str, status: str, kind: str):
        super().__init__(
            f"event {kind} is illegal for image {image_id} in status {status}"
        )
        self.image_id = image_id
        self.status = status
        self.kind = kind


class DuplicateSeqError(FoodharvestError):
    """An event arrived with a sequence number that is not the next one."""


class StoreError(FoodharvestError):
    """Generic annotation-store violation."""


class UnknownImageError(StoreError):
    """Referenced image_id is not in the store."""

    def __init__(self, image_id: str):
        super().__init__(f"unknown image {image_id}")
        self.image_id = image_id


class NotLeaseholderError(StoreError):
    """Caller does not hold the current unexpired lease on the image."""


class ValidationError(StoreError):
    """Request payload is semantically invalid (geometry, labels, verdict
    reason pairing)."""
