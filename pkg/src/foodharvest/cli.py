"""Pipeline entry point: collect -> score -> calibrate -> filter -> serve ->
export, sharing one data directory.

Flags merge over an optional JSON --config file (flags win). Completed
stages are detected by an input fingerprint and reported as "up to date".
Exit codes: 0 success, 1 stage failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from contextlib import contextmanager
from pathlib import Path

from filelock import FileLock, Timeout

from . import __version__
from .errors import ConfigError, FoodharvestError
from .manifest import Status, load_labels, load_manifest, write_manifest

LOCK_FILE = ".foodharvest.lock"
STAGE_DIR = ".stages"

DEFAULTS = {
    "collect": {"max_per_label": 100, "provider": "fixture", "rate": 1.0, "fixture_dir": None},
    "score": {"backend": "mock", "endpoint": None, "sidecar_dir": None, "mock_key": "foodharvest-mock"},
    "calibrate": {
        "fractions": "0.5,0.6,0.7,0.8,0.9",
        "trials": 1000,
        "sample_size": 200,
        "grid": 0.01,
        "pmin": 0.8,
        "rmin": 0.8,
        "mode": "trials",
        "seed": 0,
        "figures": True,
    },
    "filter": {"threshold": "auto", "report": None},
    "serve": {"port": 8080, "host": "127.0.0.1", "lease_ttl": 600.0, "tutorial": None, "ui": None},
    "export": {"format": "coco", "out": None},
    "stats": {"csv": None},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foodharvest",
        description="Collect, score, filter, and crowd-annotate food images.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON file of defaults; explicit flags win")
        p.add_argument("--dry-run", action="store_true", help="print the plan, change nothing")

    p = sub.add_parser("collect", help="crawl ranked images for each label")
    p.add_argument("--labels", required=True)
    p.add_argument("--max-per-label", type=int)
    p.add_argument("--provider", choices=["fixture", "live"])
    p.add_argument("--out", required=True, help="data directory")
    p.add_argument("--rate", type=float, help="max requests per second per host")
    p.add_argument("--fixture-dir", help="directory served by the fixture provider")
    add_common(p)

    p = sub.add_parser("score", help="attach foodness scores to fetched images")
    p.add_argument("--backend", choices=["mock", "sidecar", "remote"])
    p.add_argument("--manifest", required=True)
    p.add_argument("--endpoint", help="inference service base URL (remote backend)")
    p.add_argument("--sidecar-dir", help="directory of <content_hash>.score files")
    p.add_argument("--mock-key", help="seed key for the mock backend")
    add_common(p)

    p = sub.add_parser("calibrate", help="sweep thresholds over labeled score pools")
    p.add_argument("--food", required=True, help="JSONL pool of food scores")
    p.add_argument("--nonfood", required=True, help="JSONL pool of non-food scores")
    p.add_argument("--fractions", help="comma-separated food fractions")
    p.add_argument("--trials", type=int)
    p.add_argument("--sample-size", type=int)
    p.add_argument("--grid", type=float)
    p.add_argument("--pmin", type=float)
    p.add_argument("--rmin", type=float)
    p.add_argument("--mode", choices=["trials", "analytic"])
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--no-figures", dest="figures", action="store_false", default=None)
    add_common(p)

    p = sub.add_parser("filter", help="partition scored images at a threshold")
    p.add_argument("--threshold", help='numeric threshold or "auto"')
    p.add_argument("--manifest", required=True)
    p.add_argument("--report", help="calibration report for --threshold auto")
    add_common(p)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--port", type=int)
    p.add_argument("--host")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--lease-ttl", type=float)
    p.add_argument("--tutorial")
    p.add_argument("--ui", help="directory of built web client assets")
    add_common(p)

    p = sub.add_parser("export", help="write the annotated dataset manifest")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out")
    p.add_argument("--format")
    add_common(p)

    p = sub.add_parser("stats", help="per-label image and box counts")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--csv", help="also write the table as CSV")
    add_common(p)

    return parser


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Overlay: explicit flags > config file entries > built-in defaults."""
    config = {}
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {path} does not exist")
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
    merged = dict(DEFAULTS.get(args.command, {}))
    merged.update({k.replace("-", "_"): v for k, v in config.items()})
    for key, value in merged.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def _fingerprint(*parts) -> str:
    digest = hashlib.sha256()
    for part in parts:
        if isinstance(part, bytes):
            digest.update(part)
        else:
            digest.update(str(part).encode("utf-8"))
        digest.update(b"\x1f")
    return digest.hexdigest()


def _stamp_path(data_dir: Path, stage: str) -> Path:
    return data_dir / STAGE_DIR / f"{stage}.json"


def _stage_up_to_date(data_dir: Path, stage: str, fingerprint: str, outputs: list[Path]) -> bool:
    stamp = _stamp_path(data_dir, stage)
    if not stamp.exists() or not all(p.exists() for p in outputs):
        return False
    try:
        recorded = json.loads(stamp.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        return False
    return recorded.get("fingerprint") == fingerprint


def _write_stamp(data_dir: Path, stage: str, fingerprint: str, outputs: list[Path]) -> None:
    stamp = _stamp_path(data_dir, stage)
    stamp.parent.mkdir(parents=True, exist_ok=True)
    stamp.write_text(
        json.dumps({"fingerprint": fingerprint, "outputs": [str(p) for p in outputs]}),
        encoding="utf-8",
    )


@contextmanager
def stage_lock(data_dir: Path):
    """One stage at a time per data directory."""
    data_dir.mkdir(parents=True, exist_ok=True)
    lock = FileLock(str(data_dir / LOCK_FILE))
    try:
        with lock.acquire(timeout=0):
            yield
    except Timeout:
        raise FoodharvestError(
            f"another stage holds the lock on {data_dir}; retry when it finishes"
        )


# ----------------------------------------------------------------------
# Stages


def cmd_collect(args) -> int:
    from .crawler import (
        CrawlSession,
        FixtureProvider,
        FixtureSite,
        HostRateLimiter,
        ImageStore,
        LiveProvider,
        RateLimitedFetcher,
    )

    labels = load_labels(args.labels)
    data_dir = Path(args.out)
    manifest_path = data_dir / "manifest.jsonl"
    if args.provider == "fixture" and not args.fixture_dir:
        raise ConfigError("--fixture-dir is required with the fixture provider")

    if args.dry_run:
        print("collect (dry run):")
        print(f"  labels: {len(labels)} ({', '.join(l.id for l in labels)})")
        print(f"  provider: {args.provider}")
        print(f"  up to {args.max_per_label} images per label at {args.rate} req/s per host")
        print(f"  would write {manifest_path} and {data_dir / 'images'}")
        return 0

    fingerprint = _fingerprint(
        Path(args.labels).read_bytes(),
        args.provider,
        args.max_per_label,
        args.rate,
        args.fixture_dir or "",
    )
    with stage_lock(data_dir):
        if _stage_up_to_date(data_dir, "collect", fingerprint, [manifest_path]):
            print("collect: up to date")
            return 0

        existing = load_manifest(manifest_path) if manifest_path.exists() else []
        fetcher = RateLimitedFetcher(limiter=HostRateLimiter.per_second(args.rate))
        session = CrawlSession(
            store=ImageStore(data_dir / "images"),
            fetcher=fetcher,
            known_hashes={r.content_hash for r in existing},
            taken_ids={r.image_id for r in existing},
        )

        site = None
        try:
            if args.provider == "fixture":
                site = FixtureSite(args.fixture_dir).start()
                provider = FixtureProvider(site.base_url, fetcher)
            else:
                provider = LiveProvider()

            from .crawler import crawl

            new_records = []
            for label in labels:
                records = crawl(label, args.max_per_label, provider, session)
                print(f"collect: {label.id}: {len(records)} images")
                new_records.extend(records)
        finally:
            if site is not None:
                site.stop()
            fetcher.close()

        write_manifest(manifest_path, existing + new_records)
        _write_stamp(data_dir, "collect", fingerprint, [manifest_path])
        print(f"collect: wrote {len(new_records)} new records to {manifest_path}")
    return 0


def _build_backend(args, data_dir: Path):
    from .scorer import MockBackend, RemoteBackend, SidecarBackend

    if args.backend == "mock":
        return MockBackend(key=args.mock_key)
    if args.backend == "sidecar":
        sidecar_dir = Path(args.sidecar_dir) if args.sidecar_dir else data_dir / "scores"
        return SidecarBackend(sidecar_dir)
    if not args.endpoint:
        raise ConfigError("--endpoint is required with the remote backend")
    return RemoteBackend(endpoint=args.endpoint)


def cmd_score(args) -> int:
    from .crawler import ImageStore
    from .scorer import score_image

    manifest_path = Path(args.manifest)
    if not manifest_path.exists():
        raise ConfigError(f"manifest {manifest_path} does not exist")
    data_dir = manifest_path.parent
    records = load_manifest(manifest_path)
    pending = [r for r in records if r.status is Status.FETCHED]

    if args.dry_run:
        print("score (dry run):")
        print(f"  backend: {args.backend}")
        print(f"  would score {len(pending)} of {len(records)} records in {manifest_path}")
        return 0

    with stage_lock(data_dir):
        if not pending:
            print("score: up to date (no unscored records)")
            return 0
        backend = _build_backend(args, data_dir)
        image_store = ImageStore(data_dir / "images")
        scored = {}
        for record in pending:
            data = image_store.load(record.content_hash)
            result = score_image(record.image_id, data, backend)
            scored[record.image_id] = record.with_score(result.foodness)
        write_manifest(
            manifest_path, [scored.get(r.image_id, r) for r in records]
        )
        print(f"score: scored {len(scored)} images with {args.backend} backend")
    return 0


def parse_fractions(raw) -> list[float]:
    if isinstance(raw, (list, tuple)):
        values = [float(v) for v in raw]
    else:
        try:
            values = [float(part) for part in str(raw).split(",") if part.strip()]
        except ValueError:
            raise ConfigError(f"cannot parse fractions from {raw!r}")
    if not values:
        raise ConfigError("at least one food fraction is required")
    for value in values:
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"food fraction {value} outside (0, 1]")
    return values


def cmd_calibrate(args) -> int:
    from .calibration import load_pool, run_calibration

    fractions = parse_fractions(args.fractions)
    out_path = Path(args.out)
    csv_path = out_path.with_suffix(".csv")
    figure_paths = [
        out_path.with_name(out_path.stem + "_pr_curves.png"),
        out_path.with_name(out_path.stem + "_ranges.png"),
    ]
    outputs = [out_path, csv_path] + (figure_paths if args.figures else [])

    if args.dry_run:
        print("calibrate (dry run):")
        print(f"  mode: {args.mode}, fractions: {fractions}")
        print(f"  would write {', '.join(str(p) for p in outputs)}")
        return 0

    food_bytes = Path(args.food).read_bytes()
    nonfood_bytes = Path(args.nonfood).read_bytes()
    fingerprint = _fingerprint(
        food_bytes, nonfood_bytes, fractions, args.trials, args.sample_size,
        args.grid, args.pmin, args.rmin, args.mode, args.seed, args.figures,
    )
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with stage_lock(out_path.parent):
        if _stage_up_to_date(out_path.parent, f"calibrate-{out_path.stem}", fingerprint, outputs):
            print("calibrate: up to date")
            return 0

        food_pool = load_pool(args.food, expect_is_food=True)
        nonfood_pool = load_pool(args.nonfood, expect_is_food=False)
        report = run_calibration(
            food_pool,
            nonfood_pool,
            fractions,
            grid_step=args.grid,
            p_min=args.pmin,
            r_min=args.rmin,
            mode=args.mode,
            trials=args.trials,
            sample_size=args.sample_size,
            seed=args.seed,
        )
        report.write_json(out_path)
        report.write_csv(csv_path)
        if args.figures:
            from .calibration.figures import render_pr_curves, render_threshold_bands

            render_pr_curves(report, figure_paths[0])
            render_threshold_bands(report, figure_paths[1])
        _write_stamp(out_path.parent, f"calibrate-{out_path.stem}", fingerprint, outputs)

        for fraction in fractions:
            key = f"{fraction:g}"
            print(f"calibrate: {fraction:.0%} food: {report.ranges[key].as_interval()}")
        print(f"calibrate: intersection: {report.intersection.as_interval()}")
        if report.default_threshold is not None:
            print(f"calibrate: default threshold: {report.default_threshold:g}")
        else:
            print("calibrate: no threshold satisfies the floors in every mixture")
        print(f"calibrate: report written to {out_path}")
    return 0


def cmd_filter(args) -> int:
    from .calibration import load_report
    from .scorer import filter_partition

    manifest_path = Path(args.manifest)
    if not manifest_path.exists():
        raise ConfigError(f"manifest {manifest_path} does not exist")
    data_dir = manifest_path.parent

    if str(args.threshold) == "auto":
        report_path = Path(args.report) if args.report else data_dir / "report.json"
        if not report_path.exists():
            raise ConfigError(
                f'--threshold auto needs a calibration report at {report_path}'
            )
        report = load_report(report_path)
        if report.default_threshold is None:
            raise ConfigError(
                "calibration report has an empty intersection; pass an explicit threshold"
            )
        threshold = float(report.default_threshold)
    else:
        try:
            threshold = float(args.threshold)
        except (TypeError, ValueError):
            raise ConfigError(f"threshold must be a number or 'auto', got {args.threshold!r}")
        if not 0.0 <= threshold <= 1.0:
            raise ConfigError(f"threshold {threshold} outside [0, 1]")

    records = load_manifest(manifest_path)
    scored = [r for r in records if r.status is Status.SCORED]

    if args.dry_run:
        print("filter (dry run):")
        print(f"  threshold: {threshold:g}")
        print(f"  would partition {len(scored)} scored records in {manifest_path}")
        return 0

    with stage_lock(data_dir):
        if not scored:
            print("filter: up to date (no records awaiting the filter)")
            return 0
        kept, rejected = filter_partition(scored, threshold)
        updated = {r.image_id: r for r in kept + rejected}
        write_manifest(manifest_path, [updated.get(r.image_id, r) for r in records])
        print(f"filter: applied threshold {threshold:g}")
        print(f"filter: kept {len(kept)} for review, auto-rejected {len(rejected)}")
    return 0


def _open_store(args, lease_ttl: float = 600.0):
    from .annostore import AnnotationStore

    labels = load_labels(args.labels)
    data_dir = Path(args.data)
    return AnnotationStore(labels, root=data_dir / "store", lease_ttl=lease_ttl), data_dir


def cmd_serve(args) -> int:
    import uvicorn

    from .annoserve import create_app
    from .crawler import ImageStore

    if args.dry_run:
        print("serve (dry run):")
        print(f"  would listen on {args.host}:{args.port} over data dir {args.data}")
        return 0

    store, data_dir = _open_store(args, lease_ttl=args.lease_ttl)
    manifest_path = data_dir / "manifest.jsonl"
    if manifest_path.exists():
        added = store.ingest_manifest(load_manifest(manifest_path))
        if added:
            print(f"serve: ingested {added} manifest records")
    app = create_app(
        store,
        image_store=ImageStore(data_dir / "images"),
        tutorial_path=args.tutorial,
        static_dir=args.ui,
    )
    print(f"serve: listening on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export(args) -> int:
    from .annoserve import export_coco, export_json_bytes
    from .crawler import ImageStore

    store, data_dir = _open_store(args)
    if args.format != "coco":
        raise ConfigError(f"unknown export format {args.format!r}")
    out_path = Path(args.out) if args.out else data_dir / "export.coco.json"

    if args.dry_run:
        print("export (dry run):")
        print(f"  would write {out_path}")
        return 0

    with stage_lock(data_dir):
        manifest = export_coco(store, ImageStore(data_dir / "images"))
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(export_json_bytes(manifest))
        print(
            f"export: {len(manifest['images'])} images, "
            f"{len(manifest['annotations'])} boxes -> {out_path}"
        )
    return 0


def format_stats_table(report) -> str:
    """Three-column table: label, image count, box count, plus totals."""
    header = ("Food Label", "Food Image Count", "Bounding Box Count")
    rows = [(row.label_text, str(row.image_count), str(row.box_count)) for row in report.rows]
    rows.append(("Total", str(report.total_images), str(report.total_boxes)))
    widths = [
        max(len(header[col]), *(len(r[col]) for r in rows)) for col in range(3)
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
    return "\n".join(lines)


def cmd_stats(args) -> int:
    store, data_dir = _open_store(args)
    if args.dry_run:
        print("stats (dry run): would print the per-label table")
        return 0
    report = store.stats()
    print(format_stats_table(report))
    if args.csv:
        import csv as csv_module

        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv_module.writer(fh)
            writer.writerow(["Food Label", "Food Image Count", "Bounding Box Count"])
            for row in report.rows:
                writer.writerow([row.label_text, row.image_count, row.box_count])
            writer.writerow(["Total", report.total_images, report.total_boxes])
        print(f"stats: table written to {args.csv}")
    return 0


COMMANDS = {
    "collect": cmd_collect,
    "score": cmd_score,
    "calibrate": cmd_calibrate,
    "filter": cmd_filter,
    "serve": cmd_serve,
    "export": cmd_export,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config(args)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FoodharvestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NotImplementedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
