import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from foodharvest.errors import (
    BackendUnavailableError,
    MissingScoreError,
    UndecodableImageError,
)
from foodharvest.manifest import ImageRecord, Status
from foodharvest.scorer import (
    Detection,
    MockBackend,
    RemoteBackend,
    SidecarBackend,
    filter_partition,
    score_image,
)


class StubBackend:
    def __init__(self, detections):
        self.detections = detections

    def detect(self, data):
        return self.detections


def record(image_id, foodness=None, status=Status.SCORED):
    return ImageRecord(
        image_id=image_id,
        label_id="doughnut",
        source_url=f"http://x/{image_id}",
        rank=1,
        content_hash=image_id * 4,
        width_px=8,
        height_px=8,
        status=status,
        foodness=foodness,
    )


class TestDetectionGeometry:
    def test_valid_box(self):
        Detection(x=0.1, y=0.1, w=0.5, h=0.5, objectness=0.9)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(x=-0.1, y=0.0, w=0.5, h=0.5, objectness=0.5),
            dict(x=0.0, y=0.0, w=0.0, h=0.5, objectness=0.5),
            dict(x=0.0, y=0.0, w=0.5, h=0.0, objectness=0.5),
            dict(x=0.9, y=0.0, w=0.2, h=0.5, objectness=0.5),
            dict(x=0.0, y=0.9, w=0.5, h=0.2, objectness=0.5),
            dict(x=0.0, y=0.0, w=0.5, h=0.5, objectness=1.5),
        ],
    )
    def test_invalid_boxes(self, kwargs):
        with pytest.raises(ValueError):
            Detection(**kwargs)


class TestScoreImage:
    def test_no_detections_scores_zero(self, tiny_png):
        result = score_image("img-1", tiny_png(0), StubBackend([]))
        assert result.foodness == 0.0
        assert result.detections == ()

    def test_foodness_is_max_objectness(self, tiny_png):
        detections = [
            Detection(x=0.0, y=0.0, w=0.5, h=0.5, objectness=0.3),
            Detection(x=0.5, y=0.5, w=0.4, h=0.4, objectness=0.9),
        ]
        result = score_image("img-1", tiny_png(0), StubBackend(detections))
        assert result.foodness == 0.9

    def test_undecodable_bytes(self):
        with pytest.raises(UndecodableImageError):
            score_image("img-1", b"definitely not an image", StubBackend([]))


class TestMockBackend:
    def test_deterministic(self, tiny_png):
        data = tiny_png(5)
        backend = MockBackend()
        assert backend.detect(data) == backend.detect(data)

    def test_key_changes_scores(self, tiny_png):
        results_a = [MockBackend("a").detect(tiny_png(i)) for i in range(16)]
        results_b = [MockBackend("b").detect(tiny_png(i)) for i in range(16)]
        assert results_a != results_b

    def test_detections_satisfy_geometry(self, tiny_png):
        backend = MockBackend()
        for i in range(64):
            for d in backend.detect(tiny_png(i)):
                assert 0 <= d.x and 0 <= d.y
                assert d.w > 0 and d.h > 0
                assert d.x + d.w <= 1 and d.y + d.h <= 1
                assert 0 <= d.objectness <= 1

    def test_score_spread(self, tiny_png):
        backend = MockBackend()
        scores = {
            score_image(f"i{i}", tiny_png(i), backend).foodness for i in range(48)
        }
        assert len(scores) > 10  # not collapsed to a constant


class TestSidecarBackend:
    def test_reads_score_file(self, tmp_path, tiny_png):
        data = tiny_png(9)
        digest = hashlib.sha256(data).hexdigest()
        (tmp_path / f"{digest}.score").write_text("0.77\n")
        result = score_image("img-9", data, SidecarBackend(tmp_path))
        assert result.foodness == 0.77

    def test_missing_file(self, tmp_path, tiny_png):
        with pytest.raises(BackendUnavailableError):
            SidecarBackend(tmp_path).detect(tiny_png(1))

    def test_malformed_file(self, tmp_path, tiny_png):
        data = tiny_png(2)
        digest = hashlib.sha256(data).hexdigest()
        (tmp_path / f"{digest}.score").write_text("not a number")
        with pytest.raises(BackendUnavailableError):
            SidecarBackend(tmp_path).detect(data)

    def test_out_of_range_score(self, tmp_path, tiny_png):
        data = tiny_png(3)
        digest = hashlib.sha256(data).hexdigest()
        (tmp_path / f"{digest}.score").write_text("1.5")
        with pytest.raises(BackendUnavailableError):
            SidecarBackend(tmp_path).detect(data)


class _DetectHandler(BaseHTTPRequestHandler):
    payload = {"detections": [{"x": 0.1, "y": 0.2, "w": 0.3, "h": 0.4, "objectness": 0.66}]}
    status = 200

    def do_POST(self):
        self.rfile.read(int(self.headers.get("content-length", 0)))
        body = json.dumps(self.payload).encode()
        self.send_response(self.status)
        self.send_header("content-type", "application/json")
        self.send_header("content-length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, format, *args):
        pass


@pytest.fixture
def detect_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _DetectHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}", _DetectHandler
    server.shutdown()
    server.server_close()


class TestRemoteBackend:
    def test_parses_detections(self, detect_server, tiny_png):
        url, handler = detect_server
        handler.status = 200
        backend = RemoteBackend(endpoint=url)
        result = score_image("img-1", tiny_png(0), backend)
        assert result.foodness == 0.66
        assert result.detections[0].x == 0.1
        backend.close()

    def test_server_error(self, detect_server, tiny_png):
        url, handler = detect_server
        handler.status = 503
        backend = RemoteBackend(endpoint=url)
        with pytest.raises(BackendUnavailableError):
            backend.detect(tiny_png(0))
        handler.status = 200
        backend.close()

    def test_unreachable(self, tiny_png):
        backend = RemoteBackend(endpoint="http://127.0.0.1:9", timeout=0.5)
        with pytest.raises(BackendUnavailableError):
            backend.detect(tiny_png(0))
        backend.close()


class TestFilterPartition:
    def test_default_threshold_example(self):
        records = [record("a", 0.77), record("b", 0.57), record("c", 0.67)]
        kept, rejected = filter_partition(records, 0.67)
        assert [r.image_id for r in kept] == ["a", "c"]
        assert [r.image_id for r in rejected] == ["b"]
        assert all(r.status is Status.PENDING_REVIEW for r in kept)
        assert all(r.status is Status.AUTO_REJECTED for r in rejected)

    def test_zero_threshold_keeps_all(self):
        records = [record(str(i), i / 10) for i in range(5)]
        kept, rejected = filter_partition(records, 0.0)
        assert len(kept) == 5 and not rejected

    def test_unit_threshold_rejects_all_below_one(self):
        records = [record(str(i), 0.1 + i / 100) for i in range(5)]
        kept, rejected = filter_partition(records, 1.0)
        assert not kept and len(rejected) == 5

    def test_missing_score_names_image(self):
        with pytest.raises(MissingScoreError) as excinfo:
            filter_partition([record("img-broken", None)], 0.5)
        assert "img-broken" in str(excinfo.value)

    def test_partition_is_exhaustive_and_disjoint(self):
        records = [record(str(i), (i * 37 % 100) / 100) for i in range(50)]
        kept, rejected = filter_partition(records, 0.42)
        assert len(kept) + len(rejected) == 50
        assert {r.image_id for r in kept}.isdisjoint(r.image_id for r in rejected)

    def test_kept_set_antitone_in_threshold(self):
        records = [record(str(i), (i * 13 % 101) / 100) for i in range(60)]
        previous = None
        for threshold in [i / 20 for i in range(21)]:
            kept, _ = filter_partition(records, threshold)
            ids = {r.image_id for r in kept}
            if previous is not None:
                assert ids.issubset(previous)
            previous = ids
