"""Job and artifact persistence.

Job metadata lives in a single-file SQLite database; artifact payloads live in
a content-addressed directory next to it (files named by their sha256, written
temp-then-rename). Both survive process crashes, which is what the resume
logic in the runner builds on.
"""
from __future__ import annotations

import json
import os
import sqlite3
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Optional

from ..core import DesignRequest, EvaluationReport

STATE_ORDER = ("queued", "retrieving", "composing", "generating", "evaluating", "done", "failed")
TERMINAL_STATES = ("done", "failed")

_SCHEMA = """
CREATE TABLE IF NOT EXISTS jobs (
    job_id TEXT PRIMARY KEY,
    state TEXT NOT NULL,
    request_json TEXT NOT NULL,
    report_json TEXT,
    error_json TEXT,
    created_at TEXT NOT NULL,
    updated_at TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS job_timestamps (
    job_id TEXT NOT NULL,
    state TEXT NOT NULL,
    ts TEXT NOT NULL,
    PRIMARY KEY (job_id, state)
);
CREATE TABLE IF NOT EXISTS artifacts (
    job_id TEXT NOT NULL,
    stage TEXT NOT NULL,
    sha256 TEXT NOT NULL,
    media_type TEXT NOT NULL,
    written_at TEXT NOT NULL,
    PRIMARY KEY (job_id, stage)
);
"""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


@dataclass(frozen=True)
class DesignJob:
    """Read-only snapshot of one job."""

    job_id: str
    request: DesignRequest
    state: str
    artifacts: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    report: Optional[EvaluationReport] = None
    error: Optional[Mapping[str, Any]] = None
    timestamps: Mapping[str, str] = field(default_factory=dict)

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "request": self.request.to_dict(),
            "state": self.state,
            "artifacts": {k: dict(v) for k, v in self.artifacts.items()},
            "report": self.report.to_dict() if self.report else None,
            "error": dict(self.error) if self.error else None,
            "timestamps": dict(self.timestamps),
        }


class JobStore:
    """SQLite-backed job records plus a content-addressed artifact directory."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        self.artifact_dir = self.data_dir / "artifacts"
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.artifact_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.data_dir / "jobs.db", check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    # -- jobs ---------------------------------------------------------------

    def create_job(self, request: DesignRequest) -> str:
        job_id = uuid.uuid4().hex
        now = _now()
        with self._lock:
            self._conn.execute(
                "INSERT INTO jobs (job_id, state, request_json, created_at, updated_at)"
                " VALUES (?, 'queued', ?, ?, ?)",
                (job_id, json.dumps(request.to_dict()), now, now),
            )
            self._conn.execute(
                "INSERT INTO job_timestamps (job_id, state, ts) VALUES (?, 'queued', ?)",
                (job_id, now),
            )
            self._conn.commit()
        return job_id

    def advance(
        self,
        job_id: str,
        new_state: str,
        error: Optional[Mapping[str, Any]] = None,
        report: Optional[EvaluationReport] = None,
    ) -> bool:
        """Move a job forward in the state order; never backward, never out of terminal.

        Re-asserting the current state is a no-op success so a resumed stage
        can re-enter where it left off. Returns False when the transition is
        not allowed.
        """
        if new_state not in STATE_ORDER:
            raise ValueError(f"unknown state {new_state!r}")
        now = _now()
        with self._lock:
            row = self._conn.execute(
                "SELECT state FROM jobs WHERE job_id = ?", (job_id,)
            ).fetchone()
            if row is None:
                return False
            current = row[0]
            if current in TERMINAL_STATES:
                return False
            if new_state == current:
                return True
            if new_state == "failed":
                allowed = True
            else:
                allowed = STATE_ORDER.index(new_state) > STATE_ORDER.index(current)
            if not allowed:
                return False
            self._conn.execute(
                "UPDATE jobs SET state = ?, updated_at = ?, error_json = COALESCE(?, error_json),"
                " report_json = COALESCE(?, report_json) WHERE job_id = ?",
                (
                    new_state,
                    now,
                    json.dumps(dict(error)) if error else None,
                    json.dumps(report.to_dict()) if report else None,
                    job_id,
                ),
            )
            self._conn.execute(
                "INSERT OR REPLACE INTO job_timestamps (job_id, state, ts) VALUES (?, ?, ?)",
                (job_id, new_state, now),
            )
            self._conn.commit()
        return True

    def set_report(self, job_id: str, report: EvaluationReport) -> None:
        with self._lock:
            self._conn.execute(
                "UPDATE jobs SET report_json = ?, updated_at = ? WHERE job_id = ?",
                (json.dumps(report.to_dict()), _now(), job_id),
            )
            self._conn.commit()

    def get_job(self, job_id: str) -> Optional[DesignJob]:
        with self._lock:
            row = self._conn.execute(
                "SELECT job_id, state, request_json, report_json, error_json FROM jobs WHERE job_id = ?",
                (job_id,),
            ).fetchone()
            if row is None:
                return None
            stamps = self._conn.execute(
                "SELECT state, ts FROM job_timestamps WHERE job_id = ?", (job_id,)
            ).fetchall()
            arts = self._conn.execute(
                "SELECT stage, sha256, media_type FROM artifacts WHERE job_id = ?", (job_id,)
            ).fetchall()
        return DesignJob(
            job_id=row[0],
            state=row[1],
            request=DesignRequest.from_dict(json.loads(row[2])),
            report=EvaluationReport.from_dict(json.loads(row[3])) if row[3] else None,
            error=json.loads(row[4]) if row[4] else None,
            timestamps={s: t for s, t in stamps},
            artifacts={stage: {"sha256": sha, "media_type": mt} for stage, sha, mt in arts},
        )

    def list_jobs(self, state: Optional[str] = None, page: int = 1, page_size: int = 20):
        """Newest-first page of job snapshots; returns (jobs, total)."""
        if state is not None and state not in STATE_ORDER:
            raise ValueError(f"unknown state {state!r}")
        page = max(1, int(page))
        page_size = max(1, int(page_size))
        where = "WHERE state = ?" if state else ""
        args: tuple = (state,) if state else ()
        with self._lock:
            total = self._conn.execute(
                f"SELECT COUNT(*) FROM jobs {where}", args
            ).fetchone()[0]
            rows = self._conn.execute(
                f"SELECT job_id FROM jobs {where} ORDER BY created_at DESC, job_id DESC"
                " LIMIT ? OFFSET ?",
                args + (page_size, (page - 1) * page_size),
            ).fetchall()
        return [self.get_job(r[0]) for r in rows], total

    def pending_jobs(self) -> list[str]:
        """Jobs in any non-terminal state, oldest first (for crash recovery)."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT job_id FROM jobs WHERE state NOT IN (?, ?) ORDER BY created_at, job_id",
                TERMINAL_STATES,
            ).fetchall()
        return [r[0] for r in rows]

    # -- artifacts ----------------------------------------------------------

    def _blob_path(self, sha: str) -> Path:
        return self.artifact_dir / sha[:2] / sha

    def put_artifact(self, job_id: str, stage: str, data: bytes, media_type: str) -> str:
        """Store artifact bytes content-addressed and bind them to (job, stage).

        Identical bytes from a resumed deterministic stage land on the same
        path, so re-running a half-finished stage never duplicates anything.
        """
        import hashlib

        sha = hashlib.sha256(data).hexdigest()
        path = self._blob_path(sha)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO artifacts (job_id, stage, sha256, media_type, written_at)"
                " VALUES (?, ?, ?, ?, ?)",
                (job_id, stage, sha, media_type, _now()),
            )
            self._conn.commit()
        return sha

    def get_artifact(self, job_id: str, stage: str):
        """Return (bytes, media_type, sha256) or None when not yet written."""
        with self._lock:
            row = self._conn.execute(
                "SELECT sha256, media_type FROM artifacts WHERE job_id = ? AND stage = ?",
                (job_id, stage),
            ).fetchone()
        if row is None:
            return None
        sha, media_type = row
        path = self._blob_path(sha)
        if not path.exists():
            return None
        return path.read_bytes(), media_type, sha

    def has_artifact(self, job_id: str, stage: str) -> bool:
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM artifacts WHERE job_id = ? AND stage = ?", (job_id, stage)
            ).fetchone()
        return row is not None
