import random
import threading
from datetime import datetime, timedelta, timezone

import pytest

from foodharvest.annostore import AnnotationStore, EventKind
from foodharvest.errors import (
    DuplicateSeqError,
    IllegalTransitionError,
    NotLeaseholderError,
    StoreError,
    UnknownImageError,
    ValidationError,
)
from foodharvest.manifest import ImageRecord, SearchLabel, Status

LABELS = [
    SearchLabel(id="doughnut", text="Doughnut"),
    SearchLabel(id="cupcake", text="Cupcake"),
]

T0 = datetime(2024, 5, 1, 12, 0, 0, tzinfo=timezone.utc)


class FakeClock:
    def __init__(self, start=T0):
        self.now = start

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += timedelta(seconds=seconds)


def record(i, label="doughnut", status=Status.PENDING_REVIEW, foodness=0.8):
    return ImageRecord(
        image_id=f"img-{i:04d}",
        label_id=label,
        source_url=f"http://site/{label}/{i}.png",
        rank=i,
        content_hash=f"{i:064d}",
        width_px=640,
        height_px=480,
        status=status,
        foodness=None if status is Status.FETCHED else foodness,
    )


def store_with_pending(n=3, **kwargs):
    clock = kwargs.pop("clock", FakeClock())
    store = AnnotationStore(LABELS, clock=clock, **kwargs)
    store.ingest_manifest([record(i + 1) for i in range(n)])
    return store, clock


class TestLifecycle:
    def test_keep_verdict_confirms(self):
        store, clock = store_with_pending(1)
        lease = store.lease("w1")
        store.record_verdict(lease.image_id, "w1", "KEEP", elapsed_ms=900)
        assert store.image(lease.image_id).status is Status.CONFIRMED

    def test_noisy_verdict_rejects_and_frees_lease(self):
        store, clock = store_with_pending(1)
        lease = store.lease("w1")
        store.record_verdict(lease.image_id, "w1", "NOISY", noisy_reason="AESTHETIC")
        image = store.image(lease.image_id)
        assert image.status is Status.NOISY_REJECTED
        assert image.noisy_reason.value == "AESTHETIC"
        assert store.lease_for(lease.image_id) is None

    def test_box_on_rejected_image_is_illegal(self):
        store, clock = store_with_pending(1)
        lease = store.lease("w1")
        store.record_verdict(lease.image_id, "w1", "NOISY", noisy_reason="IRRELEVANT")
        with pytest.raises(IllegalTransitionError):
            store.append(
                EventKind.BOX_CREATED,
                {
                    "box_id": "box-x",
                    "image_id": lease.image_id,
                    "x": 0.1,
                    "y": 0.1,
                    "w": 0.2,
                    "h": 0.2,
                    "label_id": "doughnut",
                    "worker_id": "w1",
                },
            )

    def test_verdict_reason_pairing(self):
        store, clock = store_with_pending(2)
        lease = store.lease("w1")
        with pytest.raises(ValidationError):
            store.record_verdict(lease.image_id, "w1", "NOISY")
        with pytest.raises(ValidationError):
            store.record_verdict(lease.image_id, "w1", "KEEP", noisy_reason="AESTHETIC")
        with pytest.raises(ValidationError):
            store.record_verdict(lease.image_id, "w1", "MAYBE")

    def test_done_with_zero_boxes_is_legal(self):
        store, clock = store_with_pending(1)
        lease = store.lease("w1")
        store.record_verdict(lease.image_id, "w1", "KEEP")
        store.mark_done(lease.image_id, "w1")
        assert store.image(lease.image_id).status is Status.ANNOTATED

    def test_done_requires_confirmed(self):
        store, clock = store_with_pending(1)
        lease = store.lease("w1")
        with pytest.raises(IllegalTransitionError):
            store.mark_done(lease.image_id, "w1")

    def test_duplicate_seq_rejected(self):
        store, clock = store_with_pending(1)
        from foodharvest.annostore.events import Event

        bogus = Event(seq=1, at=clock(), kind=EventKind.REVIEW_QUEUED, payload={})
        with pytest.raises(DuplicateSeqError):
            store._apply(bogus, persist=False)

    def test_unknown_image(self):
        store, clock = store_with_pending(1)
        with pytest.raises(UnknownImageError):
            store.image("img-nope")
        with pytest.raises(UnknownImageError):
            store.record_verdict("img-nope", "w1", "KEEP")

    def test_ingest_maps_statuses(self):
        store = AnnotationStore(LABELS)
        store.ingest_manifest(
            [
                record(1, status=Status.FETCHED),
                record(2, status=Status.SCORED),
                record(3, status=Status.AUTO_REJECTED),
                record(4, status=Status.PENDING_REVIEW),
            ]
        )
        assert store.image("img-0001").status is Status.FETCHED
        assert store.image("img-0002").status is Status.SCORED
        assert store.image("img-0003").status is Status.AUTO_REJECTED
        assert store.image("img-0004").status is Status.PENDING_REVIEW

    def test_ingest_is_idempotent(self):
        store = AnnotationStore(LABELS)
        records = [record(1), record(2)]
        assert store.ingest_manifest(records) == 2
        assert store.ingest_manifest(records) == 0
        assert store.last_seq == 6  # 3 events per pending record, once


class TestLeasing:
    def test_exclusive_assignment(self):
        store, clock = store_with_pending(1)
        first = store.lease("w1")
        second = store.lease("w2")
        assert first is not None
        assert second is None

    def test_two_images_two_workers(self):
        store, clock = store_with_pending(2)
        a = store.lease("w1")
        b = store.lease("w2")
        assert {a.image_id, b.image_id} == {"img-0001", "img-0002"}

    def test_lowest_rank_first(self):
        store, clock = store_with_pending(3)
        assert store.lease("w1").image_id == "img-0001"
        assert store.lease("w2").image_id == "img-0002"

    def test_same_worker_reserved_task(self):
        store, clock = store_with_pending(2)
        first = store.lease("w1")
        again = store.lease("w1")
        assert first.image_id == again.image_id

    def test_expired_lease_reassignable(self):
        store, clock = store_with_pending(1, lease_ttl=60.0)
        store.lease("w1")
        clock.advance(61)
        regained = store.lease("w2")
        assert regained is not None
        assert regained.worker_id == "w2"

    def test_mutations_require_lease(self):
        store, clock = store_with_pending(1)
        lease = store.lease("w1")
        with pytest.raises(NotLeaseholderError):
            store.record_verdict(lease.image_id, "intruder", "KEEP")
        store.record_verdict(lease.image_id, "w1", "KEEP")
        with pytest.raises(NotLeaseholderError):
            store.add_box(lease.image_id, "intruder", 0.1, 0.1, 0.2, 0.2)

    def test_expired_leaseholder_cannot_mutate(self):
        store, clock = store_with_pending(1, lease_ttl=60.0)
        lease = store.lease("w1")
        clock.advance(120)
        with pytest.raises(NotLeaseholderError):
            store.record_verdict(lease.image_id, "w1", "KEEP")

    def test_concurrent_workers_never_double_lease(self):
        store, clock = store_with_pending(20)
        grants = []
        lock = threading.Lock()

        def worker(wid):
            while True:
                lease = store.lease(wid)
                if lease is None:
                    return
                with lock:
                    grants.append((wid, lease.image_id))
                store.record_verdict(lease.image_id, wid, "KEEP")
                store.mark_done(lease.image_id, wid)

        threads = [threading.Thread(target=worker, args=(f"w{i}",)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        leased_images = [image_id for _, image_id in grants]
        assert sorted(set(leased_images)) == sorted(leased_images)
        assert len(leased_images) == 20


class TestBoxes:
    def confirmed_store(self):
        store, clock = store_with_pending(1)
        lease = store.lease("w1")
        store.record_verdict(lease.image_id, "w1", "KEEP")
        return store, clock, lease.image_id

    def test_box_defaults_to_reference_label(self):
        store, clock, image_id = self.confirmed_store()
        box = store.add_box(image_id, "w1", 0.125, 0.0833, 0.25, 0.3333)
        assert box.label_id == "doughnut"

    def test_box_label_override_and_validation(self):
        store, clock, image_id = self.confirmed_store()
        box = store.add_box(image_id, "w1", 0.1, 0.1, 0.2, 0.2, label_id="cupcake")
        assert box.label_id == "cupcake"
        with pytest.raises(ValidationError):
            store.add_box(image_id, "w1", 0.1, 0.1, 0.2, 0.2, label_id="sushi")

    def test_degenerate_geometry_rejected(self):
        store, clock, image_id = self.confirmed_store()
        with pytest.raises(ValidationError):
            store.add_box(image_id, "w1", 0.9, 0.9, 0.2, 0.2)
        with pytest.raises(ValidationError):
            store.add_box(image_id, "w1", 0.1, 0.1, 0.0, 0.2)

    def test_delete_tombstones(self):
        store, clock, image_id = self.confirmed_store()
        box = store.add_box(image_id, "w1", 0.1, 0.1, 0.2, 0.2)
        assert len(store.live_boxes(image_id)) == 1
        store.delete_box(box.box_id, "w1")
        assert store.live_boxes(image_id) == []
        with pytest.raises(StoreError):
            store.delete_box(box.box_id, "w1")

    def test_boxes_survive_done(self):
        store, clock, image_id = self.confirmed_store()
        store.add_box(image_id, "w1", 0.1, 0.1, 0.2, 0.2)
        store.add_box(image_id, "w1", 0.5, 0.5, 0.2, 0.2)
        store.mark_done(image_id, "w1")
        assert len(store.live_boxes(image_id)) == 2


class TestStats:
    def test_empty_store_zero_rows(self):
        store = AnnotationStore(LABELS)
        report = store.stats()
        assert report.total_images == 0
        assert report.total_boxes == 0
        assert [row.label_id for row in report.rows] == ["doughnut", "cupcake"]
        assert all(row.image_count == 0 and row.box_count == 0 for row in report.rows)

    def test_counts_by_uploaded_status_and_box_label(self):
        store, clock = store_with_pending(3)
        # One cupcake image that never reaches review does not count.
        store.ingest_manifest([record(9, label="cupcake", status=Status.SCORED)])
        lease = store.lease("w1")
        store.record_verdict(lease.image_id, "w1", "KEEP")
        store.add_box(lease.image_id, "w1", 0.1, 0.1, 0.2, 0.2)  # doughnut (default)
        store.add_box(lease.image_id, "w1", 0.4, 0.4, 0.2, 0.2, label_id="cupcake")
        report = store.stats()
        by_label = {row.label_id: row for row in report.rows}
        assert by_label["doughnut"].image_count == 3
        assert by_label["doughnut"].box_count == 1
        assert by_label["cupcake"].image_count == 0
        assert by_label["cupcake"].box_count == 1
        assert report.total_images == 3
        assert report.total_boxes == 2

    def test_stats_match_log_recount(self, tmp_path):
        store, clock = store_with_pending(5, root=tmp_path / "store")
        for wid in ("w1", "w2"):
            lease = store.lease(wid)
            store.record_verdict(lease.image_id, wid, "KEEP")
            store.add_box(lease.image_id, wid, 0.2, 0.2, 0.3, 0.3)
            store.mark_done(lease.image_id, wid)
        report = store.stats()

        from foodharvest.annostore import read_event_log

        uploaded = set()
        boxes = 0
        for event in read_event_log(tmp_path / "store" / "events.jsonl"):
            if event.kind is EventKind.REVIEW_QUEUED:
                uploaded.add(event.payload["image_id"])
            elif event.kind is EventKind.BOX_CREATED:
                boxes += 1
            elif event.kind is EventKind.BOX_DELETED:
                boxes -= 1
        assert report.total_images == len(uploaded)
        assert report.total_boxes == boxes

    def test_review_ms_summary(self):
        store, clock = store_with_pending(3)
        for expected in (800, 1000, 1400):
            lease = store.lease("w1")
            store.record_verdict(
                lease.image_id, "w1", "NOISY", noisy_reason="IRRELEVANT", elapsed_ms=expected
            )
        summary = store.review_ms_summary()
        assert summary == {"count": 3, "median_ms": 1000}


class TestReplay:
    def drive_random_session(self, store, seed, n_images=12):
        rng = random.Random(seed)
        store.ingest_manifest([record(i + 1, label=rng.choice(["doughnut", "cupcake"])) for i in range(n_images)])
        workers = [f"w{i}" for i in range(3)]
        while True:
            wid = rng.choice(workers)
            lease = store.lease(wid)
            if lease is None:
                break
            image = store.image(lease.image_id)
            if image.status is Status.PENDING_REVIEW:
                if rng.random() < 0.3:
                    store.record_verdict(
                        lease.image_id,
                        wid,
                        "NOISY",
                        noisy_reason=rng.choice(["IRRELEVANT", "AESTHETIC"]),
                        elapsed_ms=rng.randrange(400, 3000),
                    )
                else:
                    store.record_verdict(lease.image_id, wid, "KEEP", elapsed_ms=700)
            else:
                created = []
                for _ in range(rng.randrange(0, 3)):
                    x, y = rng.uniform(0, 0.5), rng.uniform(0, 0.5)
                    created.append(
                        store.add_box(
                            lease.image_id, wid, x, y, rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4)
                        )
                    )
                if created and rng.random() < 0.4:
                    store.delete_box(created[0].box_id, wid)
                store.mark_done(lease.image_id, wid)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_replay_reproduces_live_state(self, tmp_path, seed):
        root = tmp_path / f"store-{seed}"
        store = AnnotationStore(LABELS, root=root, fsync=False)
        self.drive_random_session(store, seed)
        live = store.export_state()
        store.close()

        replayed = AnnotationStore(LABELS, root=root, fsync=False)
        assert replayed.export_state() == live

    def test_snapshot_plus_suffix_equals_full_replay(self, tmp_path):
        root = tmp_path / "store"
        store = AnnotationStore(LABELS, root=root, fsync=False)
        store.ingest_manifest([record(i + 1) for i in range(6)])
        lease = store.lease("w1")
        store.record_verdict(lease.image_id, "w1", "KEEP")
        snapshot_path = store.write_snapshot()
        assert snapshot_path.exists()
        # More events after the snapshot.
        store.add_box(lease.image_id, "w1", 0.1, 0.1, 0.3, 0.3)
        store.mark_done(lease.image_id, "w1")
        live = store.export_state()
        store.close()

        # Reopen (snapshot + suffix) and compare with a full-log replay.
        via_snapshot = AnnotationStore(LABELS, root=root, fsync=False)
        assert via_snapshot.export_state() == live

        full_root = tmp_path / "full"
        full_root.mkdir()
        (full_root / "events.jsonl").write_bytes((root / "events.jsonl").read_bytes())
        via_full = AnnotationStore(LABELS, root=full_root, fsync=False)
        assert via_full.export_state() == live
