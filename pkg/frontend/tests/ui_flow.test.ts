// Scripted browser flow against the real service running on stubs:
// fill the room form (4x3 m modern bedroom, bed + wardrobe), submit, watch
// the progress strip reach done, then check the score chips against the
// API's own report.

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import type { DesignJob } from "../src/types.js";

const PYTHON = process.env.DECOMIND_PYTHON ?? "python3";

let workDir: string;
let server: ChildProcess | null = null;
let base = "";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.listen(0, "127.0.0.1", () => {
      const address = srv.address();
      if (address && typeof address === "object") {
        const port = address.port;
        srv.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

async function waitForHealth(url: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const resp = await fetch(`${url}/api/health`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error(`service at ${url} never became healthy`);
    await new Promise((r) => setTimeout(r, 200));
  }
}

async function waitFor(predicate: () => boolean, what: string, timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!predicate()) {
    if (Date.now() > deadline) throw new Error(`timed out waiting for ${what}`);
    await new Promise((r) => setTimeout(r, 100));
  }
}

beforeAll(async () => {
  workDir = mkdtempSync(join(tmpdir(), "decomind-ui-"));
  const seeded = spawnSync(PYTHON, ["-m", "decomind", "demo", "init", "--dir", workDir], {
    encoding: "utf-8",
  });
  if (seeded.status !== 0) {
    throw new Error(`demo init failed:\n${seeded.stdout}\n${seeded.stderr}`);
  }
  const port = await freePort();
  base = `http://127.0.0.1:${port}`;
  server = spawn(
    PYTHON,
    ["-m", "decomind", "serve", "--config", join(workDir, "config.yaml"), "--port", String(port)],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  await waitForHealth(base);
}, 60000);

afterAll(() => {
  server?.kill("SIGTERM");
  if (workDir) rmSync(workDir, { recursive: true, force: true });
});

describe("full UI flow on the stub-backed service", () => {
  it(
    "form -> submit -> progress strip -> score chips match the API report",
    async () => {
      document.body.innerHTML = `<main id="app"></main>`;
      const root = document.getElementById("app")!;
      const client = new ApiClient(base);
      const app = new App(root, client);
      await app.start();
      await waitFor(() => root.querySelector("#room-width") !== null, "form to load");

      const setInput = (selector: string, value: string) => {
        const input = root.querySelector(selector) as HTMLInputElement;
        input.value = value;
        input.dispatchEvent(new Event("input", { bubbles: true }));
      };
      const setSelect = (selector: string, value: string) => {
        const select = root.querySelector(selector) as HTMLSelectElement;
        select.value = value;
        select.dispatchEvent(new Event("change", { bubbles: true }));
      };
      const check = (category: string) => {
        const box = root.querySelector(`input[data-category="${category}"]`) as HTMLInputElement;
        box.checked = true;
        box.dispatchEvent(new Event("change", { bubbles: true }));
      };

      setInput("#room-width", "4");
      setInput("#room-depth", "3");
      setSelect("#room-type", "bedroom");
      setSelect("#style", "modern");
      check("bed");
      check("wardrobe");
      setInput("#seed", "11");

      const submit = root.querySelector("#submit-job") as HTMLButtonElement;
      expect(submit.disabled).toBe(false);
      submit.click();

      await waitFor(() => root.querySelector("[data-testid=progress-strip]") !== null, "job view");
      const strip = () => root.querySelector("[data-testid=progress-strip]") as HTMLElement;
      await waitFor(() => strip().dataset.state === "done", "progress strip to reach done", 45000);

      // the strip marks every stage complete
      const doneStages = strip().querySelectorAll("li.stage-done");
      expect(doneStages.length).toBe(6);

      await waitFor(() => root.querySelector("[data-testid=report]") !== null, "report panel");

      const jobId = window.location.hash.replace("#/jobs/", "");
      const job: DesignJob = await (await fetch(`${base}/api/jobs/${jobId}`)).json();
      expect(job.state).toBe("done");
      const report = job.report!;

      const roomChip = root.querySelector("[data-testid=room-chip]") as HTMLElement;
      const styleChip = root.querySelector("[data-testid=style-chip]") as HTMLElement;
      const score = root.querySelector("[data-testid=score]") as HTMLElement;

      expect(roomChip.dataset.match).toBe(String(report.room_type_match));
      expect(styleChip.dataset.match).toBe(String(report.style_match));
      expect(roomChip.classList.contains(report.room_type_match ? "chip-match" : "chip-miss")).toBe(true);
      expect(styleChip.classList.contains(report.style_match ? "chip-match" : "chip-miss")).toBe(true);
      expect(roomChip.textContent).toContain(report.predicted_room_type.replace(/_/g, " "));
      expect(styleChip.textContent).toContain(report.predicted_style.replace(/_/g, " "));
      expect(score.textContent).toContain(report.final_score.toFixed(2));

      // the images shown come straight from the artifact endpoints
      const images = root.querySelectorAll(".result-images img");
      expect((images[0] as HTMLImageElement).src).toBe(`${base}/api/jobs/${jobId}/artifacts/layout`);
      expect((images[1] as HTMLImageElement).src).toBe(`${base}/api/jobs/${jobId}/artifacts/design`);
    },
    60000,
  );

  it("serves the UI bundle as static assets under /", async () => {
    const page = await fetch(`${base}/`);
    expect(page.status).toBe(200);
    const html = await page.text();
    expect(html).toContain('<main id="app">');
    const js = await fetch(`${base}/assets/main.js`);
    expect(js.status).toBe(200);
  });
});
