"""Command-line entry points."""
from __future__ import annotations

import json
import logging
from pathlib import Path

import click

from .catalog import (
    flag_scene_images,
    ingest_catalog,
    load_index,
    persist_index,
    process_backgrounds,
    white_background_mask,
)
from .core import DesignRequest, FurnitureSelection, ValidationReport, parse_request, validate_request
from .layout import compose_layout, place_furniture
from .retrieval import StubEmbeddingProvider, index_embeddings, select_furniture
from .service.config import ServiceConfig
from .service.runner import CANONICAL_STAGES, JobRunner
from .service.store import JobStore

logger = logging.getLogger(__name__)

_EXPORT_NAMES = {
    "selection": "selection.json",
    "layout": "layout.png",
    "layout_meta": "layout_meta.json",
    "prompt": "prompt.json",
    "design": "design.png",
    "design_meta": "design_meta.json",
    "report": "report.json",
    "warnings": "warnings.json",
}


def _load_config(path: str | None) -> ServiceConfig:
    if path:
        return ServiceConfig.from_file(path)
    return ServiceConfig.from_dict({})


def _read_request(path: str, config: ServiceConfig) -> DesignRequest:
    data = json.loads(Path(path).read_text())
    parsed, report = parse_request(data)
    if parsed is not None:
        result = validate_request(parsed, config.label_config())
        report = result if isinstance(result, ValidationReport) else None
    if report is not None:
        for issue in report.issues:
            click.echo(f"invalid request: {issue.field}: {issue.message}", err=True)
        raise SystemExit(2)
    return parsed


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Room-design generation pipeline."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), help="Service config file (YAML).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8600, show_default=True)
def serve(config_path, host, port) -> None:
    """Run the pipeline service (REST API plus UI when configured)."""
    import uvicorn

    from .service.api import create_app

    cfg = _load_config(config_path)
    uvicorn.run(create_app(cfg), host=host, port=port, log_level="info")


@main.command()
@click.option("--request", "request_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--config", "config_path", type=click.Path(exists=True))
@click.option("--index", "index_path", type=click.Path(exists=True), help="Catalog archive (overrides config).")
def run(request_path, out_dir, config_path, index_path) -> None:
    """Run one design job synchronously and export its artifacts to a directory."""
    cfg = _load_config(config_path)
    if index_path:
        cfg.catalog_index = index_path
    if not cfg.catalog_index:
        raise click.ClickException("no catalog index configured; pass --index or set catalog_index")
    request = _read_request(request_path, cfg)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    store = JobStore(out / ".store")
    try:
        runner = JobRunner(store, cfg.build_components())
        job_id = store.create_job(request)
        job = runner.run_job(job_id)
        for stage, name in _EXPORT_NAMES.items():
            found = store.get_artifact(job_id, stage)
            if found is not None:
                (out / name).write_bytes(found[0])
        (out / "job.json").write_text(json.dumps(job.to_dict(), indent=2))
    finally:
        store.close()

    if job.state != "done":
        click.echo(f"job {job_id} failed: {job.error}", err=True)
        raise SystemExit(1)
    click.echo(f"job {job_id} done")
    click.echo(f"artifacts: {', '.join(_EXPORT_NAMES[s] for s in CANONICAL_STAGES)} -> {out}")
    if job.report:
        click.echo(
            f"score {job.report.final_score:.2f} "
            f"(room_type {'match' if job.report.room_type_match else 'miss'}, "
            f"style {'match' if job.report.style_match else 'miss'})"
        )


@main.group()
def catalog() -> None:
    """Catalog preparation commands."""


def _resolve_scene_detector(spec: str | None):
    if not spec:
        return None
    if spec == "filename":
        # test/demo detector: flags files whose name mentions a room scene
        def by_filename(image) -> float:
            name = Path(getattr(image, "filename", "") or "").name.lower()
            return 1.0 if "room" in name or "scene" in name else 0.0

        return by_filename
    from .service.config import _load_plugin

    return _load_plugin(spec, "scene detector")


@catalog.command("build")
@click.option("--root", "root_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--store", "store_name", default="ikea", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--scene-threshold", default=0.5, show_default=True)
@click.option("--scene-detector", default=None, help="'filename' or module:factory; omit to skip the pass.")
@click.option("--no-matting", is_flag=True, help="Skip background removal.")
@click.option("--provider-dim", default=64, show_default=True, help="Stub embedding dimension.")
@click.option("--category-map", default=None, help="JSON object mapping folder names to category labels.")
def catalog_build(
    root_dir, store_name, out_path, scene_threshold, scene_detector, no_matting, provider_dim, category_map
) -> None:
    """Ingest an image tree, clean it, embed it, and write the catalog archive."""
    mapping = json.loads(category_map) if category_map else None
    warnings: list[str] = []
    index = ingest_catalog(root_dir, store_name, mapping)
    click.echo(f"ingested {len(index.assets)} assets from {root_dir}")

    detector = _resolve_scene_detector(scene_detector)
    if detector is not None:
        index = flag_scene_images(index, detector, scene_threshold, warnings)
        scenes = sum(1 for a in index.assets if a.exclusion_reason == "scene_image")
        click.echo(f"scene filter excluded {scenes} assets (threshold {scene_threshold})")

    if not no_matting:
        images_dir = Path(out_path).with_suffix("").as_posix() + "_images"
        index = process_backgrounds(index, white_background_mask, images_dir, warnings)
        click.echo(f"background-removed images written to {images_dir}")

    provider = StubEmbeddingProvider(provider_dim)
    index = index_embeddings(index, provider, warnings)
    persist_index(index, out_path)
    usable = len(index.non_excluded())
    click.echo(f"catalog written: {out_path} ({usable} usable assets, provider {provider.provider_id})")
    for message in warnings:
        click.echo(f"warning: {message}", err=True)


@main.command()
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--request", "request_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def retrieve(index_path, request_path, out_path) -> None:
    """Select top-k furniture per requested category from a catalog archive."""
    cfg = _load_config(None)
    index = load_index(index_path)
    provider = StubEmbeddingProvider.parse_provider_id(index.provider_id)
    if provider is None:
        raise click.ClickException(
            f"index was embedded by {index.provider_id!r}; use the service config to plug that provider in"
        )
    request = _read_request(request_path, cfg)
    selection = select_furniture(request, index, provider)
    Path(out_path).write_text(selection.to_json())
    counts = {cat: len(p) for cat, p in selection.picks.items()}
    click.echo(f"selection written: {out_path} {counts}")


@main.group("layout")
def layout_group() -> None:
    """Layout rendering commands."""


@layout_group.command("render")
@click.option("--request", "request_path", required=True, type=click.Path(exists=True))
@click.option("--selection", "selection_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--pixels-per-m", "ppm", default=100, show_default=True)
def layout_render(request_path, selection_path, out_path, ppm) -> None:
    """Rasterize the conditioning image for a request and selection."""
    cfg = _load_config(None)
    request = _read_request(request_path, cfg)
    selection = FurnitureSelection.from_json(Path(selection_path).read_text())
    plan = place_furniture(request, selection)
    control = compose_layout(request, plan.placements, ppm)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(control.png_bytes())
    sidecar = control.sidecar()
    sidecar["unplaced"] = [u.to_dict() for u in plan.unplaced]
    out.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))
    click.echo(f"layout written: {out} ({control.image.shape[1]}x{control.image.shape[0]} px)")
    for item in plan.unplaced:
        click.echo(f"unplaceable: {item.category} {item.asset_id}: {item.reason}", err=True)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8601, show_default=True)
def sidecar(host, port) -> None:
    """Serve the stub generation backend over the sidecar HTTP protocol."""
    import uvicorn

    from .generation import StubBackend, build_sidecar_app

    uvicorn.run(build_sidecar_app(StubBackend()), host=host, port=port, log_level="info")


@main.group()
def demo() -> None:
    """Self-contained demo assets."""


_DEMO_CATEGORIES = ("bed", "wardrobe", "sofa", "table", "chair", "desk")


def _demo_image(category: str, variant: int):
    """Small deterministic product-style picture: colored item on white."""
    import numpy as np
    from PIL import Image

    import hashlib

    digest = hashlib.sha256(f"{category}:{variant}".encode()).digest()
    color = tuple(int(b) for b in digest[:3])
    arr = np.full((48, 48, 3), 255, dtype=np.uint8)
    pad = 6 + (variant % 3) * 4
    arr[pad:-pad, pad:-pad] = color
    return Image.fromarray(arr)


@demo.command("init")
@click.option("--dir", "target_dir", required=True, type=click.Path())
@click.option("--per-category", default=3, show_default=True)
def demo_init(target_dir, per_category) -> None:
    """Create fixture images, build a catalog, and write a ready-to-serve config."""
    target = Path(target_dir)
    images = target / "images"
    for category in _DEMO_CATEGORIES:
        (images / category).mkdir(parents=True, exist_ok=True)
        for i in range(per_category):
            _demo_image(category, i).save(images / category / f"{category}_{i}.png")

    index = ingest_catalog(images, "ikea")
    index = index_embeddings(index, StubEmbeddingProvider(64))
    archive = target / "catalog.dmc"
    persist_index(index, archive)

    ui_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    config = {
        "data_dir": str(target / "data"),
        "catalog_index": str(archive),
    }
    if ui_dist.is_dir():
        config["ui_dir"] = str(ui_dist)
    config_path = target / "config.yaml"
    config_path.write_text("".join(f"{k}: {v}\n" for k, v in config.items()))
    click.echo(f"demo catalog ready: {archive} ({len(index.non_excluded())} assets)")
    click.echo(f"start the service with: decomind serve --config {config_path}")


if __name__ == "__main__":
    main()
