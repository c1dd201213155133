"""Generation backend contract, a deterministic stub, and the HTTP sidecar adapter.

Real layout-conditioned diffusion runs behind this contract (in-process
plug-in or HTTP sidecar); nothing in the pipeline imports a model framework.
The stub backend makes every end-to-end path reproducible without weights:
its output is a pure function of (prompt hash, layout bytes, seed).
"""
from __future__ import annotations

import hashlib
import json
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Mapping, Optional

import numpy as np

from . import raster
from .core import canonical_json, content_hash
from .layout import ControlLayout
from .promptgen import PromptBundle, prompt_bundle_hash

DEFAULT_TIMEOUT_S = 300.0
PROBE_TIMEOUT_S = 5.0
STAMP_BYTES = 32  # sha256 digest stamped into row 0
_PALETTE_SALT = b"decomind-stub-palette"


class GenerationError(Exception):
    pass


class BackendTimeout(GenerationError):
    """Backend did not answer in time; safe to retry with the same inputs."""


class ParameterError(GenerationError):
    """Backend rejected the requested parameters (e.g. image size)."""


@dataclass(frozen=True)
class GenerationParams:
    """Sampler knobs; defaults follow common latent-diffusion practice."""

    seed: int = 0
    steps: int = 30
    guidance_scale: float = 7.5
    conditioning_scale: float = 1.0
    output_size: tuple[int, int] = (512, 512)

    def validate(self) -> None:
        if self.seed < 0:
            raise ParameterError("seed must be non-negative")
        if self.steps < 1:
            raise ParameterError("steps must be >= 1")
        if self.guidance_scale < 0:
            raise ParameterError("guidance_scale must be >= 0")
        if not 0 <= self.conditioning_scale <= 2:
            raise ParameterError("conditioning_scale must lie in [0, 2]")
        w, h = self.output_size
        if w < 8 or h < 8 or w % 8 or h % 8:
            raise ParameterError(f"output sides must be positive multiples of 8, got {w}x{h}")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "steps": self.steps,
            "guidance_scale": self.guidance_scale,
            "conditioning_scale": self.conditioning_scale,
            "output_size": list(self.output_size),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "GenerationParams":
        size = data.get("output_size", (512, 512))
        return cls(
            seed=int(data.get("seed", 0)),
            steps=int(data.get("steps", 30)),
            guidance_scale=float(data.get("guidance_scale", 7.5)),
            conditioning_scale=float(data.get("conditioning_scale", 1.0)),
            output_size=(int(size[0]), int(size[1])),
        )


@dataclass(eq=False)
class GeneratedDesign:
    """One generated image plus everything needed to reproduce and audit it."""

    image: np.ndarray
    prompt: PromptBundle
    layout_hash: str
    params: GenerationParams
    backend_id: str
    wall_time_s: float

    def record(self) -> dict:
        """JSON-serializable record (the image itself is stored as PNG)."""
        return {
            "prompt": self.prompt.to_dict(),
            "layout_hash": self.layout_hash,
            "params": self.params.to_dict(),
            "backend_id": self.backend_id,
            "wall_time_s": self.wall_time_s,
        }


@dataclass(frozen=True)
class BackendProbe:
    backend_id: str
    status: str  # "healthy" | "unreachable" | "error"
    model: str = ""
    max_side_px: Optional[int] = None
    latency_s: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "backend_id": self.backend_id,
            "status": self.status,
            "model": self.model,
            "max_side_px": self.max_side_px,
            "latency_s": self.latency_s,
            "detail": self.detail,
        }


class GenerationBackend(ABC):
    """Layout-conditioned text-to-image contract."""

    backend_id: str

    @abstractmethod
    def probe(self) -> BackendProbe:
        ...

    @abstractmethod
    def generate_image(
        self, prompt: PromptBundle, layout_png: bytes, params: GenerationParams
    ) -> np.ndarray:
        """Produce an (H, W, 3) uint8 image of exactly params.output_size."""


def seed_palette(seed: int) -> bytes:
    """Three bytes derived from the seed; they pick the stub's tint."""
    return hashlib.sha256(_PALETTE_SALT + int(seed).to_bytes(8, "little")).digest()[:3]


def _stamp_row(img: np.ndarray, row: int, payload: bytes) -> None:
    flat = img[row].reshape(-1)
    flat[:] = 0
    n = min(len(payload), flat.size)
    flat[:n] = np.frombuffer(payload[:n], dtype=np.uint8)


def _read_row(img: np.ndarray, row: int, n: int) -> bytes:
    flat = img[row].reshape(-1)
    return flat[: min(n, flat.size)].tobytes()


def decode_prompt_stamp(image: np.ndarray) -> bytes:
    """Recover the prompt-bundle digest the stub stamped into row 0."""
    return _read_row(image, 0, STAMP_BYTES)


def decode_palette_stamp(image: np.ndarray) -> bytes:
    """Recover the seed palette the stub stamped into row 1."""
    return _read_row(image, 1, 3)


class StubBackend(GenerationBackend):
    """Deterministic test backend.

    Resamples the layout to the output size, tints it with a seed-derived
    palette, then stamps the prompt digest into row 0 and the palette into
    row 1 so downstream stages can verify provenance without a model.
    """

    backend_id = "stub-v1"

    def probe(self) -> BackendProbe:
        return BackendProbe(
            backend_id=self.backend_id,
            status="healthy",
            model="identity-tint",
            max_side_px=4096,
            latency_s=0.0,
        )

    def generate_image(self, prompt, layout_png, params) -> np.ndarray:
        params.validate()
        base = raster.decode_png(layout_png)[:, :, :3]
        out_w, out_h = params.output_size
        img = raster.nearest_resize(base, out_w, out_h)
        palette = seed_palette(params.seed)
        tint = 0.5 + np.frombuffer(palette, dtype=np.uint8).astype(np.float64) / 510.0
        img = np.clip(np.floor(img.astype(np.float64) * tint + 0.5), 0, 255).astype(np.uint8)
        _stamp_row(img, 0, prompt_bundle_hash(prompt))
        if img.shape[0] > 1:
            _stamp_row(img, 1, palette)
        return img


class HttpBackend(GenerationBackend):
    """Adapter for a sidecar speaking the generation protocol over HTTP.

    POST /generate with multipart (prompt JSON, layout PNG, params JSON)
    returning a PNG; GET /health returning a probe report.
    """

    def __init__(self, base_url: str, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.backend_id = f"http:{self.base_url}"

    def probe(self) -> BackendProbe:
        import httpx

        start = time.perf_counter()
        try:
            resp = httpx.get(f"{self.base_url}/health", timeout=PROBE_TIMEOUT_S)
            resp.raise_for_status()
            data = resp.json()
        except Exception as exc:
            return BackendProbe(
                backend_id=self.backend_id,
                status="unreachable",
                latency_s=time.perf_counter() - start,
                detail=str(exc),
            )
        return BackendProbe(
            backend_id=str(data.get("backend_id", self.backend_id)),
            status=str(data.get("status", "healthy")),
            model=str(data.get("model", "")),
            max_side_px=data.get("max_side_px"),
            latency_s=time.perf_counter() - start,
        )

    def generate_image(self, prompt, layout_png, params) -> np.ndarray:
        import httpx

        params.validate()
        files = {
            "prompt": ("prompt.json", canonical_json(prompt.to_dict()).encode(), "application/json"),
            "layout": ("layout.png", layout_png, "image/png"),
            "params": ("params.json", canonical_json(params.to_dict()).encode(), "application/json"),
        }
        try:
            resp = httpx.post(f"{self.base_url}/generate", files=files, timeout=self.timeout_s)
        except httpx.TimeoutException as exc:
            raise BackendTimeout(
                f"backend {self.backend_id} timed out after {self.timeout_s}s; retry the job"
            ) from exc
        except httpx.HTTPError as exc:
            raise GenerationError(f"backend {self.backend_id} unreachable: {exc}") from exc
        if resp.status_code == 422 or resp.status_code == 400:
            raise ParameterError(f"backend rejected parameters: {resp.text}")
        if resp.status_code != 200:
            raise GenerationError(f"backend error {resp.status_code}: {resp.text}")
        return raster.decode_png(resp.content)[:, :, :3]


def probe_backend(backend: GenerationBackend) -> BackendProbe:
    """Health report for any backend; never raises."""
    try:
        return backend.probe()
    except Exception as exc:
        return BackendProbe(backend_id=getattr(backend, "backend_id", "?"), status="error", detail=str(exc))


def generate(
    prompt: PromptBundle,
    layout: ControlLayout,
    params: GenerationParams,
    backend: GenerationBackend,
) -> GeneratedDesign:
    """Run one generation call and wrap the result with its provenance.

    The layout hash is taken over the exact PNG bytes handed to the backend,
    so any tampering between composition and generation shows up as a hash
    mismatch in the stored record.
    """
    params.validate()
    if layout.image.size == 0:
        raise GenerationError("layout image is degenerate")
    probe = probe_backend(backend)
    if probe.status != "healthy":
        raise GenerationError(f"backend {backend.backend_id} not healthy: {probe.status} {probe.detail}")
    if probe.max_side_px is not None and max(params.output_size) > probe.max_side_px:
        raise ParameterError(
            f"backend max side {probe.max_side_px}px below requested {params.output_size}"
        )
    png = layout.png_bytes()
    start = time.perf_counter()
    image = backend.generate_image(prompt, png, params)
    wall_time = time.perf_counter() - start
    expect_w, expect_h = params.output_size
    if image.shape[1] != expect_w or image.shape[0] != expect_h:
        raise GenerationError(
            f"backend returned {image.shape[1]}x{image.shape[0]}, expected {expect_w}x{expect_h}"
        )
    return GeneratedDesign(
        image=image,
        prompt=prompt,
        layout_hash=content_hash(png),
        params=params,
        backend_id=backend.backend_id,
        wall_time_s=wall_time,
    )


def build_sidecar_app(backend: GenerationBackend):
    """FastAPI app exposing ``backend`` over the sidecar protocol.

    Lets any in-process backend (the stub included) serve remote callers, and
    doubles as the reference implementation of the protocol.
    """
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse, Response

    app = FastAPI(title="generation sidecar")

    @app.get("/health")
    def health():
        return probe_backend(backend).to_dict()

    async def generate_endpoint(request):
        try:
            form = await request.form()
            missing = [k for k in ("prompt", "layout", "params") if k not in form]
            if missing:
                return JSONResponse(status_code=400, content={"error": f"missing parts: {missing}"})
            bundle = PromptBundle.from_dict(json.loads(await form["prompt"].read()))
            gen_params = GenerationParams.from_dict(json.loads(await form["params"].read()))
            layout_png = await form["layout"].read()
            gen_params.validate()
            image = backend.generate_image(bundle, layout_png, gen_params)
        except ParameterError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        except Exception as exc:
            return JSONResponse(status_code=500, content={"error": str(exc)})
        return Response(content=raster.encode_png(image), media_type="image/png")

    # assigned explicitly: PEP 563 turns inline hints into unresolvable strings here
    generate_endpoint.__annotations__ = {"request": Request}
    app.post("/generate")(generate_endpoint)

    return app
