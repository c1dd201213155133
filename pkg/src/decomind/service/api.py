"""REST surface of the pipeline service.

JSON bodies follow the core-model wire format exactly; the browser UI is
served as static assets under / when configured.
"""
from __future__ import annotations

import logging
import queue
import threading
from contextlib import asynccontextmanager
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from ..core import parse_request, validate_request, ValidationReport
from ..generation import probe_backend
from .config import ServiceConfig
from .runner import CANONICAL_STAGES, AUX_STAGES, JobRunner
from .store import JobStore, STATE_ORDER

logger = logging.getLogger(__name__)

_KNOWN_STAGES = CANONICAL_STAGES + AUX_STAGES


class JobQueue:
    """In-process FIFO feeding a fixed pool of worker threads."""

    def __init__(self, runner: JobRunner, workers: int = 1):
        self.runner = runner
        self.workers = max(1, workers)
        self._queue: "queue.Queue[Optional[str]]" = queue.Queue()
        self._threads: list[threading.Thread] = []

    def submit(self, job_id: str) -> None:
        self._queue.put(job_id)

    def start(self) -> None:
        for i in range(self.workers):
            t = threading.Thread(target=self._work, name=f"decomind-worker-{i}", daemon=True)
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        for _ in self._threads:
            self._queue.put(None)
        for t in self._threads:
            t.join(timeout=5)
        self._threads.clear()

    def _work(self) -> None:
        while True:
            job_id = self._queue.get()
            if job_id is None:
                return
            try:
                self.runner.run_job(job_id)
            except Exception:
                logger.exception("worker crashed on job %s", job_id)


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    store = JobStore(config.data_dir)
    components = config.build_components()
    runner = JobRunner(store, components)
    jobs = JobQueue(runner, workers=config.workers)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        jobs.start()
        for job_id in runner.recover():
            jobs.submit(job_id)
        yield
        jobs.stop()
        store.close()

    app = FastAPI(title="decomind", lifespan=lifespan)
    app.state.store = store
    app.state.components = components
    app.state.runner = runner
    app.state.queue = jobs
    app.state.config = config

    @app.post("/api/jobs", status_code=202)
    async def submit_job(request: Request):
        if components.index is None:
            return JSONResponse(
                status_code=503,
                content={"error": "service_not_ready", "detail": "catalog index not loaded"},
            )
        try:
            body = await request.json()
        except Exception:
            return JSONResponse(status_code=400, content={"error": "invalid_json"})
        parsed, report = parse_request(body if isinstance(body, dict) else {})
        if parsed is not None:
            result = validate_request(parsed, components.labels)
            if isinstance(result, ValidationReport):
                report = result
        if report is not None:
            return JSONResponse(
                status_code=400,
                content={"error": "invalid_request", **report.to_dict()},
            )
        job_id = store.create_job(parsed)
        jobs.submit(job_id)
        return {"job_id": job_id}

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = store.get_job(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": "job_not_found"})
        return job.to_dict()

    @app.get("/api/jobs")
    def list_jobs(state: Optional[str] = None, page: int = 1, page_size: int = 20):
        if state is not None and state not in STATE_ORDER:
            return JSONResponse(
                status_code=400,
                content={"error": "invalid_state", "detail": f"state must be one of {STATE_ORDER}"},
            )
        page_size = min(max(1, page_size), 100)
        listed, total = store.list_jobs(state=state, page=page, page_size=page_size)
        return {
            "jobs": [j.to_dict() for j in listed],
            "page": page,
            "page_size": page_size,
            "total": total,
        }

    @app.get("/api/jobs/{job_id}/artifacts/{stage}")
    def get_artifact(job_id: str, stage: str):
        job = store.get_job(job_id)
        if job is None:
            return JSONResponse(status_code=404, content={"error": "job_not_found"})
        if stage not in _KNOWN_STAGES:
            return JSONResponse(
                status_code=404,
                content={"error": "unknown_stage", "detail": f"stage must be one of {_KNOWN_STAGES}"},
            )
        found = store.get_artifact(job_id, stage)
        if found is None:
            return JSONResponse(
                status_code=409,
                content={"error": "not_ready", "detail": f"stage {stage} not reached yet"},
            )
        data, media_type, sha = found
        return Response(content=data, media_type=media_type, headers={"X-Content-Sha256": sha})

    @app.get("/api/catalog/categories")
    def catalog_categories():
        cats = list(components.index.categories()) if components.index else []
        return {"categories": cats}

    @app.get("/api/labels")
    def labels():
        return components.labels.to_dict()

    @app.get("/api/health")
    def health():
        return {
            "status": "ok",
            "catalog_loaded": components.index is not None,
            "catalog_assets": len(components.index.assets) if components.index else 0,
            "backend": probe_backend(components.backend).to_dict(),
        }

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
