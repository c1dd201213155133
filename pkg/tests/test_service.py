from __future__ import annotations

import hashlib
import json
import time

import pytest
from fastapi.testclient import TestClient

from decomind.catalog import ingest_catalog, persist_index
from decomind.core import DesignRequest
from decomind.generation import StubBackend
from decomind.retrieval import StubEmbeddingProvider, index_embeddings
from decomind.service.api import create_app
from decomind.service.config import ServiceConfig
from decomind.service.runner import CANONICAL_STAGES, JobRunner, derive_seed
from decomind.service.store import JobStore

from conftest import varied_png


@pytest.fixture(scope="module")
def catalog_archive(tmp_path_factory):
    root = tmp_path_factory.mktemp("catalog")
    for cat, count in (("bed", 2), ("wardrobe", 2), ("sofa", 3)):
        (root / cat).mkdir()
        for i in range(count):
            varied_png(root / cat / f"{cat}_{i}.png", f"{cat}:{i}")
    index = index_embeddings(ingest_catalog(root, "ikea"), StubEmbeddingProvider(16))
    archive = tmp_path_factory.mktemp("index") / "catalog.dmc"
    persist_index(index, archive)
    return archive


def _config(tmp_path, catalog_archive, **overrides) -> ServiceConfig:
    cfg = ServiceConfig(
        data_dir=str(tmp_path / "data"),
        catalog_index=str(catalog_archive),
        output_width=128,
        output_height=128,
        **overrides,
    )
    return cfg


def _request_body(**overrides) -> dict:
    body = {
        "room_type": "bedroom",
        "style": "modern",
        "room_width_m": 4.0,
        "room_depth_m": 3.0,
        "openings": [{"kind": "door", "wall": "north", "offset_m": 0.4, "width_m": 0.9}],
        "furniture_categories": ["bed", "wardrobe"],
        "seed": 7,
    }
    body.update(overrides)
    return body


def _wait_terminal(client, job_id, timeout=20.0):
    states = []
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/api/jobs/{job_id}").json()
        states.append(job["state"])
        if job["state"] in ("done", "failed"):
            return job, states
        time.sleep(0.02)
    raise TimeoutError(f"job stuck, states seen: {states[-5:]}")


class TestApi:
    @pytest.fixture
    def client(self, tmp_path, catalog_archive):
        app = create_app(_config(tmp_path, catalog_archive))
        with TestClient(app) as client:
            yield client

    def test_submit_and_complete(self, client):
        resp = client.post("/api/jobs", json=_request_body())
        assert resp.status_code == 202
        job_id = resp.json()["job_id"]

        snapshot = client.get(f"/api/jobs/{job_id}").json()
        assert snapshot["request"]["room_type"] == "bedroom"

        job, states = _wait_terminal(client, job_id)
        assert job["state"] == "done"
        for stage in CANONICAL_STAGES:
            assert stage in job["artifacts"], stage
        report = job["report"]
        assert report["final_score"] in (0.0, 0.5, 1.0)

        # recomputed score must equal the stored score
        expected = 0.5 * int(report["room_type_match"]) + 0.5 * int(report["style_match"])
        assert report["final_score"] == expected

        # observed states never regress
        order = ("queued", "retrieving", "composing", "generating", "evaluating", "done")
        indices = [order.index(s) for s in states]
        assert indices == sorted(indices)

    def test_artifact_bytes_hash(self, client):
        job_id = client.post("/api/jobs", json=_request_body()).json()["job_id"]
        job, _ = _wait_terminal(client, job_id)
        for stage in CANONICAL_STAGES:
            resp = client.get(f"/api/jobs/{job_id}/artifacts/{stage}")
            assert resp.status_code == 200
            recorded = job["artifacts"][stage]["sha256"]
            assert hashlib.sha256(resp.content).hexdigest() == recorded
        layout = client.get(f"/api/jobs/{job_id}/artifacts/layout")
        assert layout.headers["content-type"] == "image/png"

    def test_invalid_request_rejected_with_fields(self, client):
        resp = client.post("/api/jobs", json=_request_body(furniture_categories=[]))
        assert resp.status_code == 400
        fields = [issue["field"] for issue in resp.json()["issues"]]
        assert "furniture_categories" in fields

    def test_unknown_job(self, client):
        assert client.get("/api/jobs/zzz").status_code == 404
        assert client.get("/api/jobs/zzz/artifacts/layout").status_code == 404

    def test_artifact_not_ready(self, client):
        store: JobStore = client.app.state.store
        request = DesignRequest.from_dict(_request_body())
        job_id = store.create_job(request)  # never enqueued
        resp = client.get(f"/api/jobs/{job_id}/artifacts/design")
        assert resp.status_code == 409
        assert resp.json()["error"] == "not_ready"
        assert client.get(f"/api/jobs/{job_id}/artifacts/nonsense").status_code == 404

    def test_two_submissions_two_jobs(self, client):
        a = client.post("/api/jobs", json=_request_body()).json()["job_id"]
        b = client.post("/api/jobs", json=_request_body()).json()["job_id"]
        assert a != b

    def test_list_filter_and_pagination(self, client):
        done_id = client.post("/api/jobs", json=_request_body()).json()["job_id"]
        _wait_terminal(client, done_id)
        listed = client.get("/api/jobs", params={"state": "done"}).json()
        assert listed["total"] >= 1
        assert all(j["state"] == "done" for j in listed["jobs"])
        paged = client.get("/api/jobs", params={"page_size": 1, "page": 1}).json()
        assert len(paged["jobs"]) == 1
        assert client.get("/api/jobs", params={"state": "bogus"}).status_code == 400

    def test_missing_category_completes_with_warning(self, client):
        body = _request_body(furniture_categories=["bed", "aquarium"])
        job_id = client.post("/api/jobs", json=body).json()["job_id"]
        job, _ = _wait_terminal(client, job_id)
        assert job["state"] == "done"
        selection = client.get(f"/api/jobs/{job_id}/artifacts/selection").json()
        assert selection["picks"]["aquarium"] == []
        warnings = client.get(f"/api/jobs/{job_id}/artifacts/warnings")
        assert warnings.status_code == 200
        assert any("aquarium" in w for w in warnings.json())

    def test_labels_categories_health(self, client):
        labels = client.get("/api/labels").json()
        assert "bedroom" in labels["room_types"]
        assert "modern" in labels["styles"]
        cats = client.get("/api/catalog/categories").json()["categories"]
        assert set(cats) == {"bed", "wardrobe", "sofa"}
        health = client.get("/api/health").json()
        assert health["status"] == "ok"
        assert health["catalog_loaded"] is True
        assert health["backend"]["status"] == "healthy"


class TestNotReady:
    def test_submit_without_catalog(self, tmp_path):
        app = create_app(ServiceConfig(data_dir=str(tmp_path / "data")))
        with TestClient(app) as client:
            resp = client.post("/api/jobs", json=_request_body())
            assert resp.status_code == 503
            assert resp.json()["error"] == "service_not_ready"
            health = client.get("/api/health").json()
            assert health["catalog_loaded"] is False


class _ProcessKilled(BaseException):
    """Simulates the process dying: not an Exception, so no handler sees it."""


class _KilledBackend(StubBackend):
    def generate_image(self, prompt, layout_png, params):
        raise _ProcessKilled()


class _CountingProvider(StubEmbeddingProvider):
    def __init__(self, dimension=16):
        super().__init__(dimension)
        self.text_calls = 0
        self.image_calls = 0

    def embed_text(self, text):
        self.text_calls += 1
        return super().embed_text(text)

    def embed_image(self, image):
        self.image_calls += 1
        return super().embed_image(image)


class TestCrashRecovery:
    def test_kill_during_generating_resumes_once(self, tmp_path, catalog_archive):
        data_dir = tmp_path / "data"
        request = DesignRequest.from_dict(_request_body())

        # first service instance dies mid-generation
        cfg = _config(tmp_path, catalog_archive)
        components_a = cfg.build_components()
        components_a.backend = _KilledBackend()
        store_a = JobStore(data_dir)
        runner_a = JobRunner(store_a, components_a)
        job_id = store_a.create_job(request)
        with pytest.raises(_ProcessKilled):
            runner_a.run_job(job_id)
        crashed = store_a.get_job(job_id)
        assert crashed.state == "generating"
        assert "selection" in crashed.artifacts and "layout" in crashed.artifacts
        store_a.close()

        # restarted instance recovers and resumes without redoing earlier stages
        components_b = cfg.build_components()
        provider_b = _CountingProvider(16)
        components_b.provider = provider_b
        store_b = JobStore(data_dir)
        runner_b = JobRunner(store_b, components_b)
        pending = runner_b.recover()
        assert pending == [job_id]
        finished = runner_b.run_job(job_id)
        assert finished.state == "done"
        assert provider_b.text_calls == 0  # retrieval stage never re-executed

        done_jobs, total = store_b.list_jobs(state="done")
        assert total == 1
        assert [j.job_id for j in done_jobs] == [job_id]
        all_jobs, total_all = store_b.list_jobs()
        assert total_all == 1
        store_b.close()

    def test_rerun_terminal_job_is_noop(self, tmp_path, catalog_archive):
        cfg = _config(tmp_path, catalog_archive)
        store = JobStore(tmp_path / "data")
        runner = JobRunner(store, cfg.build_components())
        job_id = store.create_job(DesignRequest.from_dict(_request_body()))
        first = runner.run_job(job_id)
        assert first.state == "done"
        second = runner.run_job(job_id)
        assert second.state == "done"
        assert second.timestamps == first.timestamps
        store.close()


class TestStore:
    def test_state_machine_guards(self, tmp_path):
        store = JobStore(tmp_path / "data")
        job_id = store.create_job(DesignRequest.from_dict(_request_body()))
        assert store.advance(job_id, "retrieving")
        assert store.advance(job_id, "retrieving")  # same-state no-op allowed
        assert not store.advance(job_id, "queued")  # never backward
        assert store.advance(job_id, "generating")  # forward jumps allowed (resume)
        assert store.advance(job_id, "failed", error={"stage": "generating"})
        assert not store.advance(job_id, "done")  # terminal is terminal
        job = store.get_job(job_id)
        assert job.state == "failed"
        assert job.error["stage"] == "generating"
        store.close()

    def test_artifact_round_trip_and_dedupe(self, tmp_path):
        store = JobStore(tmp_path / "data")
        request = DesignRequest.from_dict(_request_body())
        a = store.create_job(request)
        b = store.create_job(request)
        sha_a = store.put_artifact(a, "selection", b"same-bytes", "application/json")
        sha_b = store.put_artifact(b, "selection", b"same-bytes", "application/json")
        assert sha_a == sha_b  # content-addressed: one blob on disk
        data, media_type, sha = store.get_artifact(a, "selection")
        assert data == b"same-bytes" and media_type == "application/json" and sha == sha_a
        assert store.get_artifact(a, "design") is None
        store.close()

    def test_timestamps_recorded(self, tmp_path):
        store = JobStore(tmp_path / "data")
        job_id = store.create_job(DesignRequest.from_dict(_request_body()))
        store.advance(job_id, "retrieving")
        job = store.get_job(job_id)
        assert "queued" in job.timestamps and "retrieving" in job.timestamps
        store.close()


class TestConfig:
    def test_env_overrides(self, tmp_path):
        cfg = ServiceConfig.from_dict(
            {"pixels_per_m": 50}, env={"DECOMIND_PIXELS_PER_M": "150", "DECOMIND_PROVIDER_DIM": "32"}
        )
        assert cfg.pixels_per_m == 150
        assert cfg.provider_dim == 32

    def test_unknown_keys_rejected(self):
        from decomind.service.config import ConfigError

        with pytest.raises(ConfigError):
            ServiceConfig.from_dict({"pixles_per_m": 10}, env={})

    def test_from_yaml_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("pixels_per_m: 80\nstyles: [modern, classic, bohemian]\n")
        cfg = ServiceConfig.from_file(path, env={})
        assert cfg.pixels_per_m == 80
        assert "bohemian" in cfg.styles
        labels = cfg.label_config()
        assert "bohemian" in labels.styles

    def test_derive_seed_stable(self):
        request = DesignRequest.from_dict(_request_body(seed=None))
        assert derive_seed(request) == derive_seed(request)
        assert derive_seed(DesignRequest.from_dict(_request_body(seed=5))) == 5
