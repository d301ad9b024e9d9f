import io
import random
from datetime import datetime, timedelta, timezone

import pytest
from PIL import Image

from foodharvest.manifest import ImageRecord, SearchLabel, Status

START_TIME = datetime(2024, 5, 1, 12, 0, 0, tzinfo=timezone.utc)


class FakeClock:
    """Deterministic, manually advanced clock for lease-expiry tests."""

    def __init__(self, start=START_TIME):
        self.now = start

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += timedelta(seconds=seconds)


def make_record(i, label="doughnut", status=Status.PENDING_REVIEW, foodness=0.8):
    return ImageRecord(
        image_id=f"img-{i:04d}",
        label_id=label,
        source_url=f"http://site/{label}/{i}.png",
        rank=i,
        content_hash=f"{i:064d}",
        width_px=1600,
        height_px=1200,
        status=status,
        foodness=None if status is Status.FETCHED else foodness,
    )


@pytest.fixture
def tiny_png():
    """Factory for small decodable PNG payloads with controllable content."""

    def make(seed: int = 0, size: tuple[int, int] = (8, 8)) -> bytes:
        rng = random.Random(seed)
        image = Image.new(
            "RGB", size, (rng.randrange(256), rng.randrange(256), rng.randrange(256))
        )
        image.putpixel((0, 0), (seed % 256, (seed // 256) % 256, 7))
        buffer = io.BytesIO()
        image.save(buffer, format="PNG")
        return buffer.getvalue()

    return make


@pytest.fixture
def doughnut_label():
    return SearchLabel(id="doughnut", text="doughnut")
