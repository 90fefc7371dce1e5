"""Corpus ingestion: normalization, section segmentation, rule-based entity
extraction, and anonymization of source documents.

Everything here is a pure function over immutable inputs, so documents can be
processed in parallel without shared state. Heading detection is rule-based
by design: deterministic rules are auditable and keep the downstream clause
store reproducible.
"""

from __future__ import annotations

import datetime as _dt
import json
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from sowgen import textutil
from sowgen.errors import OverlappingEntities
from sowgen.sections import canonical_key_for_heading
from sowgen.vecstore import ClauseRecord, VectorStore


@dataclass(frozen=True)
class SourceDocument:
    doc_id: str
    raw_text: str
    origin: str = ""
    ingested_at: str = ""


@dataclass(frozen=True)
class DocumentSection:
    section_id: str
    heading: str | None
    body: str
    order: int
    detected_key: str | None = None
    # Offset of `body` inside the normalized document; lets callers lift
    # section-relative entity spans to document coordinates.
    body_start: int = 0


@dataclass(frozen=True)
class ExtractedEntity:
    kind: str  # date | money | party | duration
    surface: str
    normalized: str
    span: tuple[int, int]


# Heading rules, checked in priority order.
NUMBERED_HEADING = re.compile(r"^\d+(\.\d+)*[.)]?\s+\S")
_MAX_CAPS_HEADING_WORDS = 8

# Role keywords name a party without being part of its name; suffix keywords
# end a corporate name and belong to it.
ROLE_KEYWORDS = {"Client", "Vendor", "Contractor"}
SUFFIX_KEYWORDS = {"Company", "Corp", "Inc", "LLC"}
_CAPITALIZED = re.compile(r"[A-Z][A-Za-z0-9&.'-]*")
_ROLE_BEFORE = re.compile(r"\b(Client|Vendor|Contractor)(?:'s)?[\s,:;()\"']{1,3}\Z")
# A trailing role word only counts as apposition ("DataWorks, the Vendor"),
# never across a bare space ("Deliverables the Client provides").
_ROLE_AFTER = re.compile(r"\s?[,:;(\"']\s*(?:the\s+)?(Client|Vendor|Contractor)\b")
# Sentence-initial words that survive edge-trimming but are never names.
_NON_NAME_TOKENS = {
    "A", "An", "All", "Any", "Both", "Each", "Either", "If", "Its", "Neither",
    "No", "Now", "Our", "That", "The", "Their", "This", "Upon", "Whereas",
}


def normalize_text(raw: str) -> str:
    """Canonicalize text: NFC, NBSP to space, CRLF to LF, runs of spaces/tabs
    collapsed, each line trimmed. Idempotent and total."""
    text = unicodedata.normalize("NFC", raw)
    text = text.replace(" ", " ")
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    lines = [re.sub(r"[ \t]+", " ", line).strip() for line in text.split("\n")]
    return "\n".join(lines)


def _is_heading(line: str) -> bool:
    if not line:
        return False
    if NUMBERED_HEADING.match(line):
        return True
    if (
        any(c.isalpha() for c in line)
        and line == line.upper()
        and len(line.split()) <= _MAX_CAPS_HEADING_WORDS
    ):
        return True
    return line.startswith("#")


def segment_sections(doc: SourceDocument) -> list[DocumentSection]:
    """Split a normalized document into heading-delimited sections.

    Text before the first heading becomes a headingless section; an empty
    document yields no sections. Bodies are exact substrings of the
    normalized text.
    """
    text = doc.raw_text
    if not text.strip():
        return []

    lines = text.split("\n")
    offsets: list[int] = []
    pos = 0
    for line in lines:
        offsets.append(pos)
        pos += len(line) + 1  # +1 for the newline

    sections: list[DocumentSection] = []
    current_heading: str | None = None
    body_lines: list[tuple[str, int]] = []
    saw_heading = False

    def flush() -> None:
        if current_heading is None and not any(ln for ln, _ in body_lines):
            return
        body = "\n".join(ln for ln, _ in body_lines)
        start = body_lines[0][1] if body_lines else 0
        order = len(sections)
        sections.append(
            DocumentSection(
                section_id=f"{doc.doc_id}#s{order}",
                heading=current_heading,
                body=body,
                order=order,
                detected_key=canonical_key_for_heading(current_heading),
                body_start=start,
            )
        )

    for line, start in zip(lines, offsets):
        if _is_heading(line):
            if saw_heading or body_lines:
                flush()
            current_heading = line
            body_lines = []
            saw_heading = True
        else:
            body_lines.append((line, start))
    flush()
    return sections


def _date_entities(body: str) -> list[ExtractedEntity]:
    out = []
    for pattern in (textutil.DATE_ISO, textutil.DATE_LONG):
        for m in pattern.finditer(body):
            normalized = textutil.parse_date_surface(m.group())
            if normalized is not None:
                out.append(
                    ExtractedEntity("date", m.group(), normalized, (m.start(), m.end()))
                )
    return out


def _money_entities(body: str) -> list[ExtractedEntity]:
    out = []
    for m in textutil.MONEY.finditer(body):
        parsed = textutil.parse_money_surface(m.group())
        if parsed is not None:
            code, minor = parsed
            out.append(
                ExtractedEntity("money", m.group(), f"{code}:{minor}", (m.start(), m.end()))
            )
    return out


def _duration_entities(body: str) -> list[ExtractedEntity]:
    out = []
    for m in textutil.DURATION.finditer(body):
        normalized = textutil.duration_iso(int(m.group(1)), m.group(2))
        out.append(ExtractedEntity("duration", m.group(), normalized, (m.start(), m.end())))
    return out


def _capitalized_runs(body: str) -> list[list[re.Match]]:
    """Maximal runs of capitalized tokens separated by spaces only."""
    runs: list[list[re.Match]] = []
    current: list[re.Match] = []
    for m in _CAPITALIZED.finditer(body):
        if current:
            gap = body[current[-1].end() : m.start()]
            if not gap or gap.strip(" "):
                runs.append(current)
                current = []
        current.append(m)
    if current:
        runs.append(current)
    return runs


def _strip_token(token: str) -> str:
    return token.rstrip(".,;:")


def _party_entities(body: str) -> list[ExtractedEntity]:
    """Capitalized token runs that either end in a corporate suffix or sit
    next to a role word (Client/Vendor/Contractor)."""
    entities: list[ExtractedEntity] = []
    seen: set[tuple[int, int]] = set()
    for run in _capitalized_runs(body):
        tokens = [m.group() for m in run]
        # Trim role words off the edges; they describe the party, they are
        # not part of its name.
        lo, hi = 0, len(tokens)
        while lo < hi and _strip_token(tokens[lo]) in ROLE_KEYWORDS:
            lo += 1
        while hi > lo and _strip_token(tokens[hi - 1]) in ROLE_KEYWORDS:
            hi -= 1
        if lo >= hi:
            continue
        if all(_strip_token(t) in _NON_NAME_TOKENS for t in tokens[lo:hi]):
            continue

        suffix_at = next(
            (i for i in range(lo, hi) if _strip_token(tokens[i]) in SUFFIX_KEYWORDS),
            None,
        )
        had_role_edge = lo > 0 or hi < len(tokens)
        if suffix_at is not None:
            last = run[suffix_at]
        elif had_role_edge or _adjacent_role(body, run[lo].start(), run[hi - 1].end()):
            last = run[hi - 1]
        else:
            continue
        # Sentence punctuation glued to the final token is not part of the name.
        start = run[lo].start()
        end = last.start() + len(last.group().rstrip(".,;:'\""))
        surface = body[start:end]
        if (start, end) not in seen:
            seen.add((start, end))
            entities.append(ExtractedEntity("party", surface, surface, (start, end)))
    return entities


def _adjacent_role(body: str, start: int, end: int) -> bool:
    if _ROLE_BEFORE.search(body[:start]):
        return True
    return bool(_ROLE_AFTER.match(body[end:]))


def extract_entities(section: DocumentSection) -> list[ExtractedEntity]:
    """Dates, money amounts, party names, and durations found in the section
    body, sorted by span start. Unparseable candidates are skipped."""
    body = section.body
    entities = (
        _date_entities(body)
        + _money_entities(body)
        + _duration_entities(body)
        + _party_entities(body)
    )
    return sorted(entities, key=lambda e: (e.span[0], e.span[1]))


def build_placeholders(entities: Iterable[ExtractedEntity]) -> dict[str, str]:
    """Stable surface -> placeholder map in first-occurrence order."""
    mapping: dict[str, str] = {}
    counters = {"party": 0, "money": 0}
    for ent in sorted(entities, key=lambda e: e.span[0]):
        if ent.kind not in counters or ent.surface in mapping:
            continue
        counters[ent.kind] += 1
        label = "PARTY" if ent.kind == "party" else "AMOUNT"
        mapping[ent.surface] = f"[{label}_{counters[ent.kind]}]"
    return mapping


def _substitute(text: str, entities: list[ExtractedEntity], mapping: dict[str, str]) -> str:
    spans = sorted(
        (e for e in entities if e.kind in ("party", "money")),
        key=lambda e: e.span[0],
    )
    prev_end = -1
    for ent in spans:
        start, end = ent.span
        if start < prev_end:
            raise OverlappingEntities(f"spans overlap at offset {start}")
        prev_end = end
    out: list[str] = []
    cursor = 0
    for ent in spans:
        start, end = ent.span
        if text[start:end] != ent.surface:
            raise ValueError(
                f"entity span {ent.span} does not slice to its surface "
                f"({text[start:end]!r} != {ent.surface!r})"
            )
        out.append(text[cursor:start])
        out.append(mapping[ent.surface])
        cursor = end
    out.append(text[cursor:])
    return "".join(out)


def anonymize(
    doc: SourceDocument, entities: list[ExtractedEntity]
) -> tuple[SourceDocument, dict[str, str]]:
    """Replace parties with [PARTY_n] and money with [AMOUNT_n].

    The same surface always maps to the same placeholder within one document;
    numbering follows first occurrence. Dates are preserved. Returns the
    anonymized document and the placeholder -> original-surface map used to
    restore it. Spans are document offsets; overlapping spans raise
    OverlappingEntities.
    """
    mapping = build_placeholders(entities)
    redacted = _substitute(doc.raw_text, entities, mapping)
    reverse = {placeholder: surface for surface, placeholder in mapping.items()}
    return replace(doc, raw_text=redacted), reverse


@dataclass
class IngestReport:
    documents: int = 0
    sections: int = 0
    clauses: int = 0
    anonymization_maps: dict[str, dict[str, str]] = field(default_factory=dict)


def ingest_documents(
    docs: Iterable[SourceDocument],
    store: VectorStore,
    embedder,
    now: _dt.datetime | None = None,
) -> IngestReport:
    """Normalize, segment, anonymize, embed, and index a batch of documents.

    One clause is stored per section with a non-empty body; clause ids are
    derived from doc_id and section order, so re-ingesting a document
    replaces its clauses instead of duplicating them.
    """
    report = IngestReport()
    stamp = (now or _dt.datetime.now(_dt.timezone.utc)).isoformat()
    for doc in docs:
        normalized = replace(doc, raw_text=normalize_text(doc.raw_text))
        sects = segment_sections(normalized)
        report.documents += 1
        report.sections += len(sects)

        doc_entities: list[ExtractedEntity] = []
        per_section: list[list[ExtractedEntity]] = []
        for sect in sects:
            ents = extract_entities(sect)
            per_section.append(ents)
            doc_entities.extend(
                ExtractedEntity(
                    e.kind,
                    e.surface,
                    e.normalized,
                    (e.span[0] + sect.body_start, e.span[1] + sect.body_start),
                )
                for e in ents
            )
        mapping = build_placeholders(doc_entities)
        report.anonymization_maps[doc.doc_id] = {
            placeholder: surface for surface, placeholder in mapping.items()
        }

        texts: list[str] = []
        pending: list[tuple[DocumentSection, str]] = []
        for sect, ents in zip(sects, per_section):
            # Clause text drops the incidental blank padding around a section
            # body; spans were applied before the strip.
            body = _substitute(sect.body, ents, mapping).strip()
            if not body or not textutil.split_tokens(body):
                continue
            texts.append(body)
            pending.append((sect, body))
        if not texts:
            continue
        vectors = embedder.embed(texts)
        for (sect, body), vector in zip(pending, vectors):
            store.upsert(
                ClauseRecord(
                    clause_id=sect.section_id,
                    text=body,
                    canonical_key=sect.detected_key,
                    source_doc_id=doc.doc_id,
                    embedding=vector,
                    created_at=stamp,
                )
            )
            report.clauses += 1
    return report


def load_manifest(path: Path) -> list[SourceDocument]:
    """Read an ingestion manifest: one JSON object per line with
    {doc_id, path, origin}; paths are resolved relative to the manifest."""
    docs = []
    base = path.parent
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
    for i, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"manifest line {i}: {exc}") from exc
        doc_path = base / entry["path"]
        docs.append(
            SourceDocument(
                doc_id=entry["doc_id"],
                raw_text=doc_path.read_text(encoding="utf-8"),
                origin=entry.get("origin", ""),
                ingested_at=stamp,
            )
        )
    return docs


def write_anonymization_sidecars(report: IngestReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for doc_id, mapping in report.anonymization_maps.items():
        target = out_dir / f"{doc_id}.json"
        target.write_text(
            json.dumps(mapping, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )
