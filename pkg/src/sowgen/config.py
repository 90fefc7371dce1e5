"""Application configuration.

One flat key-value file drives both the pipeline and the service, e.g.:

    # sowgen.conf
    pipeline.similarity_min = 0.70
    pipeline.k = 5
    backend.generation.kind = stub
    backend.generation.model_name = stub-drafter
    service.data_dir = ./sowgen_data

Values parse as JSON when they can (numbers, booleans, arrays) and fall back
to plain strings. Credentials never live here — descriptors name the
environment variable that holds them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from sowgen.backends import BackendDescriptor
from sowgen.orchestrator import PipelineConfig


@dataclass
class AppConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    data_dir: Path = Path("./sowgen_data")
    console_origin: str = "*"

    @property
    def index_path(self) -> Path:
        return self.data_dir / "index.jsonl"

    @property
    def runs_dir(self) -> Path:
        return self.data_dir / "runs"

    @property
    def anonymization_dir(self) -> Path:
        return self.data_dir / "anonymization"


def _parse_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def parse_config_text(text: str) -> dict:
    """Flat `dotted.key = value` lines into a nested dict."""
    tree: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        node = tree
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"config line {lineno}: {key.strip()!r} conflicts with a value")
        node[parts[-1]] = _parse_value(raw)
    return tree


def _descriptor_from(mapping: dict) -> BackendDescriptor:
    descriptor = BackendDescriptor()
    for f in fields(BackendDescriptor):
        if f.name in mapping:
            setattr(descriptor, f.name, mapping[f.name])
    descriptor.validate()
    return descriptor


def load_config(path: Path | str | None = None) -> AppConfig:
    """Build the application config from a file; missing file means defaults."""
    config = AppConfig()
    if path is None:
        return config
    text = Path(path).read_text(encoding="utf-8")
    tree = parse_config_text(text)

    pipeline_values = tree.get("pipeline", {})
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(pipeline_values) - known
    if unknown:
        raise ValueError(f"unknown pipeline setting(s): {sorted(unknown)}")
    if "required_keys" in pipeline_values:
        pipeline_values["required_keys"] = tuple(pipeline_values["required_keys"])
    pipeline = replace(PipelineConfig(), **pipeline_values)

    backends = tree.get("backend", {})
    if "generation" in backends:
        pipeline.generation = _descriptor_from(backends["generation"])
    if "classification" in backends:
        pipeline.classification = _descriptor_from(backends["classification"])
    if "embedding" in backends:
        pipeline.embedding = _descriptor_from(backends["embedding"])
    pipeline.validate()
    config.pipeline = pipeline

    service = tree.get("service", {})
    if "data_dir" in service:
        config.data_dir = Path(service["data_dir"])
    if "console_origin" in service:
        config.console_origin = str(service["console_origin"])
    return config
