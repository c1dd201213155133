// Thin fetch wrapper over the service REST API plus job polling.

import type { DesignJob, DesignRequest, JobPage, JobState, Labels, ValidationIssue } from "./types.js";

export class ApiError extends Error {
  status: number;
  issues: ValidationIssue[];

  constructor(status: number, message: string, issues: ValidationIssue[] = []) {
    super(message);
    this.status = status;
    this.issues = issues;
  }
}

export class ApiClient {
  base: string;

  constructor(base = "") {
    this.base = base.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await fetch(this.base + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const issues = Array.isArray((body as any).issues) ? (body as any).issues : [];
      throw new ApiError(resp.status, (body as any).error ?? `HTTP ${resp.status}`, issues);
    }
    return body as T;
  }

  labels(): Promise<Labels> {
    return this.request<Labels>("/api/labels");
  }

  async categories(): Promise<string[]> {
    const body = await this.request<{ categories: string[] }>("/api/catalog/categories");
    return body.categories;
  }

  async submitJob(request: DesignRequest): Promise<string> {
    const body = await this.request<{ job_id: string }>("/api/jobs", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    return body.job_id;
  }

  getJob(jobId: string): Promise<DesignJob> {
    return this.request<DesignJob>(`/api/jobs/${encodeURIComponent(jobId)}`);
  }

  listJobs(params: { state?: JobState; page?: number; page_size?: number } = {}): Promise<JobPage> {
    const query = new URLSearchParams();
    if (params.state) query.set("state", params.state);
    if (params.page) query.set("page", String(params.page));
    if (params.page_size) query.set("page_size", String(params.page_size));
    const suffix = query.toString() ? `?${query}` : "";
    return this.request<JobPage>(`/api/jobs${suffix}`);
  }

  artifactUrl(jobId: string, stage: string): string {
    return `${this.base}/api/jobs/${encodeURIComponent(jobId)}/artifacts/${encodeURIComponent(stage)}`;
  }
}

export interface PollOptions {
  initialMs?: number;
  maxMs?: number;
  backoff?: number;
  timeoutMs?: number;
}

/**
 * Poll a job until it reaches a terminal state. Interval starts at 1 s and
 * backs off toward 5 s; every snapshot is forwarded to `onUpdate`.
 */
export async function pollJob(
  client: ApiClient,
  jobId: string,
  onUpdate: (job: DesignJob) => void,
  options: PollOptions = {},
): Promise<DesignJob> {
  const initialMs = options.initialMs ?? 1000;
  const maxMs = options.maxMs ?? 5000;
  const backoff = options.backoff ?? 1.5;
  const timeoutMs = options.timeoutMs ?? 10 * 60 * 1000;
  const deadline = Date.now() + timeoutMs;

  let interval = initialMs;
  for (;;) {
    const job = await client.getJob(jobId);
    onUpdate(job);
    if (job.state === "done" || job.state === "failed") {
      return job;
    }
    if (Date.now() > deadline) {
      throw new ApiError(0, `timed out waiting for job ${jobId}`);
    }
    await sleep(interval);
    interval = Math.min(maxMs, interval * backoff);
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
