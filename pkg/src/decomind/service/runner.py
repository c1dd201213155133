"""Stage-by-stage job execution with crash-safe resume.

Each stage reads only persisted artifacts of earlier stages and writes its own
before the state advances, so a job interrupted anywhere can be re-run and
picks up at the first stage whose artifacts are missing. All stages up to
generation are bit-deterministic; a resumed stage therefore rewrites identical
content-addressed bytes.
"""
from __future__ import annotations

import hashlib
import json
import logging
import threading
from dataclasses import dataclass, field
from typing import Mapping, Optional

from ..catalog import CatalogIndex
from ..core import DesignRequest, FurnitureSelection, LabelConfig, canonical_json
from ..evaluation import LabelClassifier, score_design
from ..generation import (
    GeneratedDesign,
    GenerationBackend,
    GenerationParams,
    generate,
)
from ..layout import ControlLayout, compose_layout, place_furniture
from ..promptgen import DEFAULT_NEGATIVE, PromptBundle, build_prompt
from ..raster import decode_png, encode_png
from ..retrieval import EmbeddingProvider, select_furniture
from .store import DesignJob, JobStore

logger = logging.getLogger(__name__)

CANONICAL_STAGES = ("selection", "layout", "prompt", "design", "report")
AUX_STAGES = ("layout_meta", "design_meta", "warnings")
_JSON = "application/json"
_PNG = "image/png"


class ServiceNotReady(Exception):
    """Pipeline dependencies (catalog index) not loaded."""


@dataclass
class Components:
    """Everything a runner needs, assembled once from configuration."""

    provider: EmbeddingProvider
    backend: GenerationBackend
    room_classifier: LabelClassifier
    style_classifier: LabelClassifier
    labels: LabelConfig = field(default_factory=LabelConfig)
    index: Optional[CatalogIndex] = None
    footprints: Optional[Mapping[str, tuple[float, float]]] = None
    pixels_per_m: int = 100
    negative_prompt: str = DEFAULT_NEGATIVE
    generation_defaults: GenerationParams = field(default_factory=GenerationParams)


def derive_seed(request: DesignRequest) -> int:
    """Stable per-request seed when the user did not pick one."""
    if request.seed is not None:
        return request.seed
    digest = hashlib.sha256(request.to_json().encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


class JobRunner:
    """Drives one job through retrieve, compose, generate, evaluate."""

    def __init__(self, store: JobStore, components: Components, generation_slots: int = 1):
        self.store = store
        self.components = components
        self._gen_semaphore = threading.Semaphore(max(1, generation_slots))
        self._job_locks: dict[str, threading.Lock] = {}
        self._job_locks_guard = threading.Lock()

    def _lock_for(self, job_id: str) -> threading.Lock:
        with self._job_locks_guard:
            return self._job_locks.setdefault(job_id, threading.Lock())

    # -- public -------------------------------------------------------------

    def run_job(self, job_id: str) -> DesignJob:
        """Execute (or resume) a job to a terminal state; returns the snapshot."""
        with self._lock_for(job_id):
            job = self.store.get_job(job_id)
            if job is None:
                raise KeyError(f"unknown job {job_id}")
            if job.terminal:
                return job

            warnings: list[str] = []
            steps = (
                ("retrieving", ("selection",), self._stage_retrieve),
                ("composing", ("layout", "prompt"), self._stage_compose),
                ("generating", ("design",), self._stage_generate),
                ("evaluating", ("report",), self._stage_evaluate),
            )
            for state, produces, fn in steps:
                if all(self.store.has_artifact(job_id, stage) for stage in produces):
                    continue  # completed before a crash; never re-executed
                self.store.advance(job_id, state)
                try:
                    fn(job_id, job.request, warnings)
                except Exception as exc:
                    error = {"stage": state, "type": type(exc).__name__, "message": str(exc)}
                    logger.exception("job %s failed in %s", job_id, state)
                    self.store.advance(job_id, "failed", error=error)
                    return self.store.get_job(job_id)

            if warnings:
                self.store.put_artifact(
                    job_id, "warnings", canonical_json(warnings).encode(), _JSON
                )
            self.store.advance(job_id, "done")
            return self.store.get_job(job_id)

    def recover(self) -> list[str]:
        """Jobs left in non-terminal states by a previous process."""
        pending = self.store.pending_jobs()
        if pending:
            logger.info("recovering %d unfinished job(s)", len(pending))
        return pending

    # -- stages -------------------------------------------------------------

    def _require_index(self) -> CatalogIndex:
        if self.components.index is None:
            raise ServiceNotReady("catalog index not loaded")
        return self.components.index

    def _stage_retrieve(self, job_id: str, request: DesignRequest, warnings: list) -> None:
        index = self._require_index()
        selection = select_furniture(request, index, self.components.provider)
        for category, picks in selection.picks.items():
            if not picks:
                warnings.append(f"no catalog assets matched category {category!r}")
        self.store.put_artifact(job_id, "selection", selection.to_json().encode(), _JSON)

    def _load_selection(self, job_id: str) -> FurnitureSelection:
        data = self.store.get_artifact(job_id, "selection")
        assert data is not None, "selection artifact missing"
        return FurnitureSelection.from_json(data[0].decode())

    def _stage_compose(self, job_id: str, request: DesignRequest, warnings: list) -> None:
        selection = self._load_selection(job_id)
        plan = place_furniture(request, selection, self.components.footprints, warnings)
        for item in plan.unplaced:
            warnings.append(f"unplaceable: {item.category} {item.asset_id}: {item.reason}")
        control = compose_layout(request, plan.placements, self.components.pixels_per_m)
        meta = control.sidecar()
        meta["unplaced"] = [u.to_dict() for u in plan.unplaced]
        self.store.put_artifact(job_id, "layout", control.png_bytes(), _PNG)
        self.store.put_artifact(job_id, "layout_meta", canonical_json(meta).encode(), _JSON)
        prompt = build_prompt(request, selection, self.components.negative_prompt, warnings)
        self.store.put_artifact(job_id, "prompt", canonical_json(prompt.to_dict()).encode(), _JSON)

    def _load_layout(self, job_id: str) -> ControlLayout:
        png = self.store.get_artifact(job_id, "layout")
        meta = self.store.get_artifact(job_id, "layout_meta")
        assert png is not None and meta is not None, "layout artifacts missing"
        sidecar = json.loads(meta[0])
        from ..layout import Placement

        return ControlLayout(
            image=decode_png(png[0]),
            pixels_per_m=int(sidecar["pixels_per_m"]),
            placements=tuple(Placement.from_dict(p) for p in sidecar["placements"]),
            legend={k: tuple(v) for k, v in sidecar["legend"].items()},
        )

    def _load_prompt(self, job_id: str) -> PromptBundle:
        data = self.store.get_artifact(job_id, "prompt")
        assert data is not None, "prompt artifact missing"
        return PromptBundle.from_dict(json.loads(data[0]))

    def _generation_params(self, request: DesignRequest) -> GenerationParams:
        defaults = self.components.generation_defaults
        return GenerationParams(
            seed=derive_seed(request),
            steps=defaults.steps,
            guidance_scale=defaults.guidance_scale,
            conditioning_scale=defaults.conditioning_scale,
            output_size=defaults.output_size,
        )

    def _stage_generate(self, job_id: str, request: DesignRequest, warnings: list) -> None:
        layout = self._load_layout(job_id)
        prompt = self._load_prompt(job_id)
        params = self._generation_params(request)
        with self._gen_semaphore:
            design = generate(prompt, layout, params, self.components.backend)
        self.store.put_artifact(job_id, "design", encode_png(design.image), _PNG)
        self.store.put_artifact(
            job_id, "design_meta", canonical_json(design.record()).encode(), _JSON
        )

    def _load_design(self, job_id: str) -> GeneratedDesign:
        png = self.store.get_artifact(job_id, "design")
        meta = self.store.get_artifact(job_id, "design_meta")
        assert png is not None and meta is not None, "design artifacts missing"
        record = json.loads(meta[0])
        return GeneratedDesign(
            image=decode_png(png[0])[:, :, :3],
            prompt=PromptBundle.from_dict(record["prompt"]),
            layout_hash=record["layout_hash"],
            params=GenerationParams.from_dict(record["params"]),
            backend_id=record["backend_id"],
            wall_time_s=float(record["wall_time_s"]),
        )

    def _stage_evaluate(self, job_id: str, request: DesignRequest, warnings: list) -> None:
        design = self._load_design(job_id)
        report = score_design(
            request,
            design,
            self.components.room_classifier,
            self.components.style_classifier,
            self.components.labels,
        )
        self.store.put_artifact(
            job_id, "report", canonical_json(report.to_dict()).encode(), _JSON
        )
        self.store.set_report(job_id, report)
