from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from sowgen.backends import StubClassification, StubEmbedding, StubGeneration
from sowgen.drafting import RequirementSpec, spec_from_dict
from sowgen.ingest import ingest_documents, load_manifest
from sowgen.orchestrator import Pipeline, PipelineConfig
from sowgen.vecstore import VectorStore

settings.register_profile(
    "suite", max_examples=50, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")


class ScriptedGeneration:
    """Stub generation whose nth response can be rewritten by a mutator;
    lets tests script failures like a model that omits a clause once."""

    kind = "stub"

    def __init__(self, mutators):
        self.inner = StubGeneration()
        self.mutators = list(mutators)
        self.calls = []

    def generate(self, req):
        self.calls.append(req)
        out = self.inner.generate(req)
        index = len(self.calls) - 1
        if index < len(self.mutators) and self.mutators[index] is not None:
            out = self.mutators[index](out)
        return out


@pytest.fixture
def sample_spec() -> RequirementSpec:
    data = json.loads(
        resources.files("sowgen.data").joinpath("sample_spec.json").read_text("utf-8")
    )
    spec, errors = spec_from_dict(data)
    assert not errors
    return spec


@pytest.fixture
def stub_embedder() -> StubEmbedding:
    return StubEmbedding(384)


@pytest.fixture
def stub_classifier() -> StubClassification:
    return StubClassification()


@pytest.fixture
def corpus_docs():
    with resources.as_file(
        resources.files("sowgen.data").joinpath("corpus/manifest.jsonl")
    ) as manifest:
        return load_manifest(Path(manifest))


@pytest.fixture
def corpus_store(corpus_docs, stub_embedder) -> VectorStore:
    store = VectorStore(dim=384)
    ingest_documents(corpus_docs, store, stub_embedder)
    return store


@pytest.fixture
def eval_config() -> PipelineConfig:
    # The stub embedder's bag-of-words cosines sit far below real sentence
    # embedding scores, so the evaluation fixture retrieves unthresholded.
    return PipelineConfig(similarity_min=0.0, k=12, context_budget=20000)


@pytest.fixture
def make_pipeline():
    def factory(
        config: PipelineConfig | None = None,
        store: VectorStore | None = None,
        **kwargs,
    ) -> Pipeline:
        config = config or PipelineConfig()
        store = store or VectorStore(dim=config.embedding_dim)
        return Pipeline(config, store, **kwargs)

    return factory
