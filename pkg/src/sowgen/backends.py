"""Model backends: text generation, zero-shot classification, and embedding.

Two implementations per contract. The stub family is deterministic and
offline — a pure function of (request, seed, config) — which is what makes
every pipeline test replayable byte for byte. The HTTP family speaks a
minimal chat-completion / zero-shot / embedding wire shape; provider quirks
are handled by request templates in config, not code forks.

Backends are read-only: none of them touch the clause store or drafts.
Credentials come from the environment variable named in the descriptor and
are redacted from debug logs.
"""

from __future__ import annotations

import json
import logging
import os
import random
import re
import time
from dataclasses import dataclass, field
from importlib import resources

import httpx
import numpy as np

from sowgen.errors import (
    DimensionMismatch,
    EmptyText,
    RateLimited,
    Timeout,
    TransportError,
)
from sowgen.sections import SECTION_TITLES, match_clauses_to_keys
from sowgen.textutil import split_tokens, stable_bucket, token_set

logger = logging.getLogger("sowgen.backends")

STRUCTURED_INPUT_MARKER = "### Structured Input"
_STRUCTURED_BLOCK = re.compile(
    re.escape(STRUCTURED_INPUT_MARKER) + r"\s*```json\s*(\{.*?\})\s*```", re.DOTALL
)


@dataclass
class BackendDescriptor:
    kind: str = "stub"  # "stub" | "http"
    endpoint: str = ""
    model_name: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    api_key_env: str = ""
    backoff_base: float = 0.5
    request_template: dict | None = None
    response_path: str = ""

    def validate(self) -> None:
        if self.kind not in ("stub", "http"):
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise ValueError("http backend requires an endpoint")


@dataclass
class GenerationRequest:
    system_instructions: str
    user_content: str
    max_output_chars: int = 32768
    temperature: float = 0.2
    seed: int | None = None  # honored by the stub only


@dataclass
class ClassificationRequest:
    premise: str
    hypotheses: list[str] = field(default_factory=list)


def format_structured_input(payload: dict) -> str:
    """The machine-readable block appended to generated prompts."""
    body = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    return f"{STRUCTURED_INPUT_MARKER}\n```json\n{body}\n```"


def extract_structured_input(text: str) -> dict | None:
    m = _STRUCTURED_BLOCK.search(text)
    if not m:
        return None
    try:
        return json.loads(m.group(1))
    except json.JSONDecodeError:
        return None


def default_keyword_sets() -> dict[str, list[str]]:
    """Per-hypothesis keyword sets for the stub classifier (table-driven so
    the word lists can be edited without touching code)."""
    raw = resources.files("sowgen.data").joinpath("stub_keywords.json").read_text("utf-8")
    return json.loads(raw)


# ---------------------------------------------------------------------------
# Stub implementations
# ---------------------------------------------------------------------------

_SCOPE_OPENERS = (
    "This Statement of Work covers {project_title} for {client_name}.",
    "{vendor_name} will perform {project_title} for {client_name} under this Statement of Work.",
)
_ACCEPTANCE_OPENERS = (
    "Acceptance for each deliverable requires written confirmation from {client_name} within ten business days of delivery.",
    "{client_name} accepts each deliverable by written confirmation within ten business days of delivery.",
)

# Fixed legal boilerplate. Each sentence keeps its clause vocabulary inside
# its own section so the keyword-overlap classifier sees clean signals.
_CONFIDENTIALITY_BODY = (
    "Each party will treat the other party's proprietary information as "
    "confidential, will not disclose it to third parties, and will sign a "
    "separate non-disclosure agreement on request."
)
_LIABILITY_BODY = (
    "Neither party accepts liability for indirect or consequential damages. "
    "Each party remains liable for direct damages up to the total fees due "
    "under this Statement of Work and will indemnify the other against "
    "third-party claims arising from its own negligence."
)
_TERMINATION_BODY = (
    "Either party may terminate this Statement of Work with thirty days "
    "written notice. Immediate termination applies on material breach that "
    "stays uncured after written notice."
)


class StubGeneration:
    """Deterministic drafting stand-in.

    Reads the structured-input block embedded in the prompt and emits a
    schema-valid draft JSON whose section bodies come from the bound fields
    and the retrieved clause texts. Identical request + seed => identical
    bytes.
    """

    kind = "stub"

    def __init__(self):
        self.calls: list[GenerationRequest] = []

    def generate(self, req: GenerationRequest) -> str:
        self.calls.append(req)
        payload = extract_structured_input(req.user_content)
        rng = random.Random(req.seed if req.seed is not None else 0)
        if payload is None:
            draft = self._fallback_draft(req.user_content)
        else:
            draft = self._draft_from_payload(payload, rng)
        out = json.dumps(draft, ensure_ascii=False, indent=2)
        return out[: req.max_output_chars]

    def _fallback_draft(self, user_content: str) -> dict:
        # No structured block: echo the request as a one-section document.
        return {
            "metadata": {
                "project_title": "",
                "client": "",
                "vendor": "",
                "effective_date": "",
                "generated_at": "",
            },
            "sections": [
                {
                    "id": "scope_of_work",
                    "key": "scope_of_work",
                    "title": SECTION_TITLES["scope_of_work"],
                    "body": user_content.strip()[:500],
                    "provenance": [],
                    "order": 0,
                }
            ],
        }

    def _draft_from_payload(self, payload: dict, rng: random.Random) -> dict:
        bindings: dict[str, str] = payload.get("bindings", {})
        keys: list[str] = payload.get("required_sections", [])
        clauses: list[dict] = payload.get("context_clauses", [])
        refs = [(c["clause_id"], c.get("canonical_key")) for c in clauses]
        texts = {c["clause_id"]: c["text"] for c in clauses}
        assignment = match_clauses_to_keys(refs, keys)

        def b(name: str) -> str:
            return bindings.get(name, "")

        sections = []
        for order, key in enumerate(keys):
            body = self._section_body(key, b, rng)
            attached = assignment.get(key, [])
            if attached:
                library = "\n".join(f"- {texts[cid]}" for cid in attached)
                body = f"{body}\n\nFrom the clause library:\n{library}"
            sections.append(
                {
                    "id": key,
                    "key": key,
                    "title": SECTION_TITLES.get(key, key.replace("_", " ").title()),
                    "body": body,
                    "provenance": attached,
                    "order": order,
                }
            )
        return {
            "metadata": {
                "project_title": b("project_title"),
                "client": b("client_name"),
                "vendor": b("vendor_name"),
                "effective_date": b("start_date"),
                "generated_at": "",
            },
            "sections": sections,
        }

    def _section_body(self, key: str, b, rng: random.Random) -> str:
        if key == "scope_of_work":
            opener = rng.choice(_SCOPE_OPENERS).format(
                project_title=b("project_title"),
                client_name=b("client_name"),
                vendor_name=b("vendor_name"),
            )
            return f"{opener} {b('goals')}".strip()
        if key == "deliverables":
            items = b("deliverables") or "- To be defined."
            return f"The engagement produces the following deliverables:\n{items}"
        if key == "timeline":
            return (
                f"Work begins on {b('start_date')} and concludes by {b('end_date')}. "
                f"Milestone dates follow the deliverable list above."
            )
        if key == "responsibilities":
            return (
                f"{b('client_name')} will provide subject-matter access, source "
                f"data, and review of interim drafts. {b('vendor_name')} will "
                f"staff the engagement, manage delivery, and report progress weekly."
            )
        if key == "payment_terms":
            return b("payment_terms")
        if key == "confidentiality":
            return _CONFIDENTIALITY_BODY
        if key == "liability":
            return _LIABILITY_BODY
        if key == "termination":
            return _TERMINATION_BODY
        if key == "acceptance_criteria":
            return rng.choice(_ACCEPTANCE_OPENERS).format(client_name=b("client_name"))
        if key == "signatures":
            return (
                f"Authorized representatives of {b('client_name')} and "
                f"{b('vendor_name')} sign below to bring this Statement of Work "
                f"into force.\n\n{b('client_name')}: ____________________ Date: __________\n"
                f"{b('vendor_name')}: ____________________ Date: __________"
            )
        return f"Content for {key.replace('_', ' ')} to be agreed."


class StubClassification:
    """Keyword-overlap stand-in for zero-shot classification.

    score = |K intersect P| / |K| with K the hypothesis's keyword set and P
    the case-folded token set of the premise. Unknown hypotheses fall back to
    their own content words as the keyword set.
    """

    kind = "stub"

    def __init__(self, keyword_sets: dict[str, list[str]] | None = None):
        self.keyword_sets = keyword_sets if keyword_sets is not None else default_keyword_sets()
        self.calls = 0

    def classify(self, req: ClassificationRequest) -> list[float]:
        if not req.hypotheses:
            raise ValueError("at least one hypothesis is required")
        self.calls += 1
        premise_tokens = token_set(req.premise)
        scores = []
        for hypothesis in req.hypotheses:
            keywords = self.keyword_sets.get(hypothesis)
            if keywords is None:
                keywords = [t for t in split_tokens(hypothesis) if len(t) > 3]
            folded = {k.casefold() for k in keywords}
            if not folded:
                scores.append(0.0)
                continue
            score = len(folded & premise_tokens) / len(folded)
            scores.append(max(0.0, min(1.0, score)))
        return scores


class StubEmbedding:
    """Hashed bag-of-words embedder: tokenize on non-alphanumerics, hash each
    token into one of `dim` buckets, count, scale to unit L2 norm."""

    kind = "stub"

    def __init__(self, dim: int = 384):
        self.dim = dim
        self.calls = 0

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        self.calls += 1
        vectors = []
        for text in texts:
            if not text:
                raise EmptyText("cannot embed empty text")
            tokens = split_tokens(text)
            if not tokens:
                raise EmptyText(f"no tokens in {text!r}")
            vec = np.zeros(self.dim, dtype=np.float64)
            for token in tokens:
                vec[stable_bucket(token, self.dim)] += 1.0
            vectors.append(vec / np.linalg.norm(vec))
        return vectors


# ---------------------------------------------------------------------------
# HTTP adapter
# ---------------------------------------------------------------------------


def _fill(node, values: dict):
    """Substitute {name} placeholders in a request template. A string that is
    exactly one placeholder takes the raw value (lists stay lists)."""
    if isinstance(node, dict):
        return {k: _fill(v, values) for k, v in node.items()}
    if isinstance(node, list):
        return [_fill(v, values) for v in node]
    if isinstance(node, str):
        m = re.fullmatch(r"\{(\w+)\}", node)
        if m and m.group(1) in values:
            return values[m.group(1)]
        for name, value in values.items():
            if isinstance(value, str):
                node = node.replace("{" + name + "}", value)
        return node
    return node


def _extract_path(payload, path: str):
    node = payload
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        else:
            node = node[part]
    return node


class _HttpBase:
    kind = "http"

    def __init__(self, descriptor: BackendDescriptor, transport: httpx.BaseTransport | None = None):
        descriptor.validate()
        self.descriptor = descriptor
        self.calls = 0
        self._client = httpx.Client(timeout=descriptor.timeout, transport=transport)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.descriptor.api_key_env:
            key = os.environ.get(self.descriptor.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, payload: dict) -> dict:
        self.calls += 1
        desc = self.descriptor
        logger.debug(
            "backend request %s",
            json.dumps({"endpoint": desc.endpoint, "model": desc.model_name,
                        "authorization": "***" if desc.api_key_env else None}),
        )
        attempts = desc.max_retries + 1
        last_error: TransportError | None = None
        for attempt in range(attempts):
            if attempt:
                time.sleep(desc.backoff_base * (2 ** (attempt - 1)))
            try:
                response = self._client.post(
                    desc.endpoint, json=payload, headers=self._headers()
                )
            except httpx.TimeoutException as exc:
                last_error = Timeout(f"{desc.endpoint}: {exc}")
                continue
            except httpx.HTTPError as exc:
                last_error = TransportError(f"{desc.endpoint}: {exc}")
                continue
            if response.status_code == 429:
                last_error = RateLimited(f"{desc.endpoint}: rate limited")
                continue
            if response.status_code >= 500:
                last_error = TransportError(
                    f"{desc.endpoint}: status {response.status_code}"
                )
                continue
            if response.status_code >= 400:
                raise TransportError(
                    f"{desc.endpoint}: status {response.status_code}: {response.text[:200]}"
                )
            try:
                return response.json()
            except json.JSONDecodeError as exc:
                raise TransportError(f"{desc.endpoint}: non-JSON response: {exc}") from exc
        assert last_error is not None
        raise last_error

    def close(self) -> None:
        self._client.close()


class HttpGeneration(_HttpBase):
    """Chat-completion style endpoint."""

    DEFAULT_TEMPLATE = {
        "model": "{model_name}",
        "messages": [
            {"role": "system", "content": "{system_instructions}"},
            {"role": "user", "content": "{user_content}"},
        ],
        "temperature": "{temperature}",
    }
    DEFAULT_PATH = "choices.0.message.content"

    def generate(self, req: GenerationRequest) -> str:
        template = self.descriptor.request_template or self.DEFAULT_TEMPLATE
        body = _fill(
            template,
            {
                "model_name": self.descriptor.model_name,
                "system_instructions": req.system_instructions,
                "user_content": req.user_content,
                "temperature": req.temperature,
            },
        )
        payload = self._post(body)
        path = self.descriptor.response_path or self.DEFAULT_PATH
        try:
            text = _extract_path(payload, path)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"response missing {path!r}: {exc}") from exc
        if not isinstance(text, str):
            raise TransportError(f"response at {path!r} is not text")
        return text[: req.max_output_chars]


class HttpClassification(_HttpBase):
    """Zero-shot endpoint returning one score per hypothesis."""

    DEFAULT_TEMPLATE = {
        "model": "{model_name}",
        "premise": "{premise}",
        "hypotheses": "{hypotheses}",
    }
    DEFAULT_PATH = "scores"

    def classify(self, req: ClassificationRequest) -> list[float]:
        if not req.hypotheses:
            raise ValueError("at least one hypothesis is required")
        template = self.descriptor.request_template or self.DEFAULT_TEMPLATE
        body = _fill(
            template,
            {
                "model_name": self.descriptor.model_name,
                "premise": req.premise,
                "hypotheses": req.hypotheses,
            },
        )
        payload = self._post(body)
        path = self.descriptor.response_path or self.DEFAULT_PATH
        try:
            scores = _extract_path(payload, path)
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"response missing {path!r}: {exc}") from exc
        if not isinstance(scores, list) or len(scores) != len(req.hypotheses):
            raise TransportError("score list does not match hypothesis count")
        return [max(0.0, min(1.0, float(s))) for s in scores]


class HttpEmbedding(_HttpBase):
    """Embedding endpoint; validates the returned dimension."""

    DEFAULT_TEMPLATE = {"model": "{model_name}", "input": "{texts}"}
    DEFAULT_PATH = "data"

    def __init__(
        self,
        descriptor: BackendDescriptor,
        dim: int,
        transport: httpx.BaseTransport | None = None,
    ):
        super().__init__(descriptor, transport)
        self.dim = dim

    def embed(self, texts: list[str]) -> list[np.ndarray]:
        if any(not t for t in texts):
            raise EmptyText("cannot embed empty text")
        template = self.descriptor.request_template or self.DEFAULT_TEMPLATE
        body = _fill(template, {"model_name": self.descriptor.model_name, "texts": texts})
        payload = self._post(body)
        path = self.descriptor.response_path or self.DEFAULT_PATH
        try:
            rows = _extract_path(payload, path)
            vectors = [np.asarray(row["embedding"], dtype=np.float64) for row in rows]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise TransportError(f"malformed embedding response: {exc}") from exc
        for vec in vectors:
            if vec.shape != (self.dim,):
                raise DimensionMismatch(
                    f"endpoint returned dimension {vec.shape}, expected {self.dim}"
                )
        return vectors


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------


def generation_backend(desc: BackendDescriptor, transport=None):
    return StubGeneration() if desc.kind == "stub" else HttpGeneration(desc, transport)


def classification_backend(desc: BackendDescriptor, transport=None):
    if desc.kind == "stub":
        return StubClassification()
    return HttpClassification(desc, transport)


def embedding_backend(desc: BackendDescriptor, dim: int, transport=None):
    return StubEmbedding(dim) if desc.kind == "stub" else HttpEmbedding(desc, dim, transport)
