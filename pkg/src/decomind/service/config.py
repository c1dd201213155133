"""Service configuration: one file, plus DECOMIND_-prefixed env overrides."""
from __future__ import annotations

import importlib
import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from ..catalog import load_index
from ..core import DEFAULT_ROOM_TYPES, DEFAULT_STYLES, LabelConfig, normalize_label
from ..evaluation import FixedLabelClassifier, PaletteKeyedClassifier
from ..generation import GenerationParams, HttpBackend, StubBackend
from ..promptgen import DEFAULT_NEGATIVE
from ..retrieval import StubEmbeddingProvider
from .runner import Components

ENV_PREFIX = "DECOMIND_"


class ConfigError(Exception):
    pass


@dataclass
class ServiceConfig:
    data_dir: str = "./decomind-data"
    catalog_index: Optional[str] = None
    provider: str = "stub"
    provider_dim: int = 64
    backend: str = "stub"
    backend_timeout_s: float = 300.0
    room_classifier: str = "palette"
    style_classifier: str = "palette"
    room_types: tuple[str, ...] = DEFAULT_ROOM_TYPES
    styles: tuple[str, ...] = DEFAULT_STYLES
    scene_threshold: float = 0.5
    pixels_per_m: int = 100
    negative_prompt: str = DEFAULT_NEGATIVE
    generation_steps: int = 30
    guidance_scale: float = 7.5
    conditioning_scale: float = 1.0
    output_width: int = 512
    output_height: int = 512
    workers: int = 1
    ui_dir: Optional[str] = None
    footprints: Optional[Mapping[str, Any]] = None

    @classmethod
    def from_file(cls, path, env: Optional[Mapping[str, str]] = None) -> "ServiceConfig":
        data = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"config root must be a mapping: {path}")
        return cls.from_dict(data, env=env)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], env: Optional[Mapping[str, str]] = None) -> "ServiceConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**{k: v for k, v in data.items() if k in known})
        return cfg.apply_env(env if env is not None else os.environ)

    def apply_env(self, env: Mapping[str, str]) -> "ServiceConfig":
        updates: dict[str, Any] = {}
        known = {f.name for f in fields(self)}
        for var, raw in env.items():
            if not var.startswith(ENV_PREFIX):
                continue
            key = var[len(ENV_PREFIX):].lower()
            if key not in known:
                continue
            try:
                updates[key] = json.loads(raw)
            except ValueError:
                updates[key] = raw
        cfg = replace(self, **updates)
        cfg.room_types = tuple(normalize_label(x) for x in cfg.room_types)
        cfg.styles = tuple(normalize_label(x) for x in cfg.styles)
        return cfg

    # -- component assembly ---------------------------------------------------

    def label_config(self) -> LabelConfig:
        return LabelConfig(room_types=tuple(self.room_types), styles=tuple(self.styles))

    def generation_params(self) -> GenerationParams:
        return GenerationParams(
            steps=self.generation_steps,
            guidance_scale=self.guidance_scale,
            conditioning_scale=self.conditioning_scale,
            output_size=(self.output_width, self.output_height),
        )

    def make_provider(self):
        if self.provider == "stub":
            return StubEmbeddingProvider(self.provider_dim)
        return _load_plugin(self.provider, "provider")

    def make_backend(self):
        if self.backend == "stub":
            return StubBackend()
        if self.backend.startswith(("http://", "https://")):
            return HttpBackend(self.backend, timeout_s=self.backend_timeout_s)
        return _load_plugin(self.backend, "backend")

    def _make_classifier(self, spec: str, label_set: tuple[str, ...]):
        if spec == "palette":
            return PaletteKeyedClassifier(label_set)
        if spec.startswith("fixed:"):
            return FixedLabelClassifier(label_set, spec.split(":", 1)[1])
        return _load_plugin(spec, "classifier")

    def build_components(self) -> Components:
        labels = self.label_config()
        index = None
        if self.catalog_index:
            index = load_index(self.catalog_index)
        provider = self.make_provider()
        if index is not None and isinstance(provider, StubEmbeddingProvider):
            # queries must live in the index's embedding space; a stub provider
            # adopts the identity (and dimension) the index was built with
            matched = StubEmbeddingProvider.parse_provider_id(index.provider_id)
            if matched is not None:
                provider = matched
        footprints = None
        if self.footprints:
            footprints = {k: (float(v[0]), float(v[1])) for k, v in self.footprints.items()}
        return Components(
            provider=provider,
            backend=self.make_backend(),
            room_classifier=self._make_classifier(self.room_classifier, labels.room_types),
            style_classifier=self._make_classifier(self.style_classifier, labels.styles),
            labels=labels,
            index=index,
            footprints=footprints,
            pixels_per_m=self.pixels_per_m,
            negative_prompt=self.negative_prompt,
            generation_defaults=self.generation_params(),
        )


def _load_plugin(spec: str, what: str):
    """Resolve "package.module:factory" and call the factory with no args."""
    if ":" not in spec:
        raise ConfigError(f"unrecognized {what} spec {spec!r} (expected 'module:factory')")
    module_name, attr = spec.split(":", 1)
    try:
        factory = getattr(importlib.import_module(module_name), attr)
    except (ImportError, AttributeError) as exc:
        raise ConfigError(f"cannot load {what} plug-in {spec!r}: {exc}") from exc
    return factory()
