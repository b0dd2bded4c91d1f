"""Gazetteer extraction: scan article text against the reference bases.

Matching policy:

* case-insensitive; whitespace runs in the text match the single spaces of
  a normalized alias
* a hit must be bounded by non-alphanumeric characters or string edges, so
  "fancy bear" does not fire inside "fancy bearish"
* overlapping hits are resolved deterministically: longest match wins,
  ties go to the leftmost, same-span ties to the higher-priority category
  (actor > malware > technique > CVE > location), then to the smaller
  canonical name

Technique hits are recorded under their ATT&CK technique ID so that every
downstream stage keys rules by Txxxx identifiers.
"""

from __future__ import annotations

import csv
import io
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import date, datetime
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import DuplicateDocumentError, InputError, UnknownDocumentError
from .refbase import EntityCategory, RefEntry, ReferenceBase

ENTITYDB_HEADER = ("doc_id", "category", "canonical", "matched_phrase", "start", "end")

# Same-span tie-break: the actor identity drives the whole pipeline.
_CATEGORY_PRIORITY = {
    EntityCategory.THREAT_ACTOR: 0,
    EntityCategory.MALWARE: 1,
    EntityCategory.TECHNIQUE: 2,
    EntityCategory.CVE: 3,
    EntityCategory.LOCATION: 4,
}


@dataclass(frozen=True)
class Document:
    """One corpus article."""

    doc_id: str
    source: str = ""
    published: date | None = None
    text: str = ""


@dataclass(frozen=True)
class EntityRecord:
    """One extraction hit; span is 0-based, half-open into the source text."""

    doc_id: str
    category: EntityCategory
    canonical: str
    matched_phrase: str
    start: int
    end: int

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass
class EntityDB:
    """All extraction hits, grouped by document.

    ``by_doc`` registers every known document, including ones without any
    hits, so qualification can distinguish "no mentions" from "unknown id".
    """

    records: list[EntityRecord]
    by_doc: dict[str, list[EntityRecord]]

    @classmethod
    def from_records(
        cls,
        records: Iterable[EntityRecord],
        known_docs: Iterable[str] | None = None,
    ) -> "EntityDB":
        ordered = sorted(records, key=lambda r: (r.doc_id, r.start, r.end))
        doc_ids = {r.doc_id for r in ordered}
        if known_docs is not None:
            doc_ids.update(known_docs)
        by_doc: dict[str, list[EntityRecord]] = {d: [] for d in sorted(doc_ids)}
        for record in ordered:
            by_doc[record.doc_id].append(record)
        return cls(ordered, by_doc)

    def doc_records(self, doc_id: str) -> list[EntityRecord]:
        try:
            return self.by_doc[doc_id]
        except KeyError:
            raise UnknownDocumentError(f"unknown doc_id: {doc_id}") from None


class _Candidate(NamedTuple):
    start: int
    end: int
    category: EntityCategory
    canonical: str
    phrase: str


class GazetteerMatcher:
    """Compiled multi-pattern matcher over a set of reference bases.

    Building the patterns is the expensive part; build one matcher per
    corpus run and reuse it across documents (thread-safe, read-only).
    """

    def __init__(self, bases: Mapping[EntityCategory, ReferenceBase]):
        by_alias: dict[str, list[RefEntry]] = {}
        for base in bases.values():
            for alias, entries in base.index.items():
                by_alias.setdefault(alias, []).extend(entries)
        self._patterns: list[tuple[re.Pattern[str], list[RefEntry]]] = []
        for alias in sorted(by_alias):
            tokens = alias.split(" ")
            pattern = re.compile(
                r"\s+".join(re.escape(token) for token in tokens), re.IGNORECASE
            )
            entries = sorted(
                by_alias[alias],
                key=lambda e: (_CATEGORY_PRIORITY[e.category], e.canonical_name),
            )
            self._patterns.append((pattern, entries))

    def extract(self, doc: Document) -> list[EntityRecord]:
        text = doc.text
        if not text:
            return []
        candidates: list[_Candidate] = []
        for pattern, entries in self._patterns:
            pos = 0
            while (match := pattern.search(text, pos)) is not None:
                start, end = match.start(), match.end()
                if _word_bounded(text, start, end):
                    phrase = text[start:end]
                    for entry in entries:
                        candidates.append(
                            _Candidate(
                                start, end, entry.category,
                                _record_canonical(entry), phrase,
                            )
                        )
                    pos = end
                else:
                    # A rejected hit may still shadow a valid one that
                    # starts inside it; resume one char further only.
                    pos = start + 1
        chosen = _resolve_overlaps(candidates)
        return [
            EntityRecord(doc.doc_id, c.category, c.canonical, c.phrase, c.start, c.end)
            for c in chosen
        ]


def _record_canonical(entry: RefEntry) -> str:
    if entry.category is EntityCategory.TECHNIQUE:
        return entry.technique_id or entry.canonical_name
    return entry.canonical_name


def _word_bounded(text: str, start: int, end: int) -> bool:
    left_ok = start == 0 or not text[start - 1].isalnum()
    right_ok = end == len(text) or not text[end].isalnum()
    return left_ok and right_ok


def _resolve_overlaps(candidates: list[_Candidate]) -> list[_Candidate]:
    ranked = sorted(
        candidates,
        key=lambda c: (
            -(c.end - c.start),
            c.start,
            _CATEGORY_PRIORITY[c.category],
            c.canonical,
        ),
    )
    chosen: list[_Candidate] = []
    for cand in ranked:
        if all(cand.end <= other.start or other.end <= cand.start for other in chosen):
            chosen.append(cand)
    chosen.sort(key=lambda c: (c.start, c.end))
    return chosen


def extract_entities(
    doc: Document,
    bases: Mapping[EntityCategory, ReferenceBase] | GazetteerMatcher,
) -> list[EntityRecord]:
    """Extract all entity records from one document.

    Pure function of (doc, bases); accepts a prebuilt matcher to avoid
    recompiling patterns in a loop.
    """
    matcher = bases if isinstance(bases, GazetteerMatcher) else GazetteerMatcher(bases)
    return matcher.extract(doc)


def build_entity_db(
    corpus: Sequence[Document],
    bases: Mapping[EntityCategory, ReferenceBase] | GazetteerMatcher,
    *,
    workers: int = 1,
) -> EntityDB:
    """Extract a whole corpus into an EntityDB.

    Output is deterministic regardless of worker count: records are sorted
    by (doc_id, start, end) after the merge.
    """
    seen: set[str] = set()
    for doc in corpus:
        if doc.doc_id in seen:
            raise DuplicateDocumentError(f"duplicate doc_id: {doc.doc_id}")
        seen.add(doc.doc_id)
    matcher = bases if isinstance(bases, GazetteerMatcher) else GazetteerMatcher(bases)
    if workers > 1 and len(corpus) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_doc = list(pool.map(matcher.extract, corpus))
    else:
        per_doc = [matcher.extract(doc) for doc in corpus]
    records = [record for hits in per_doc for record in hits]
    return EntityDB.from_records(records, known_docs=seen)


def actor_of_document(db: EntityDB, doc_id: str) -> set[str]:
    """Distinct canonical threat actors mentioned in one document."""
    return {
        r.canonical
        for r in db.doc_records(doc_id)
        if r.category is EntityCategory.THREAT_ACTOR
    }


# ---------------------------------------------------------------------------
# Corpus and EntityDB file formats


def read_corpus(path: str | Path) -> list[Document]:
    """Read a JSON-Lines corpus: one document object per line."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"corpus not found: {path}")
    docs: list[Document] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise InputError(f"{path}:{lineno}: expected a JSON object")
            doc_id = obj.get("doc_id")
            text = obj.get("text")
            if not isinstance(doc_id, str) or not doc_id:
                raise InputError(f"{path}:{lineno}: doc_id must be a non-empty string")
            if not isinstance(text, str):
                raise InputError(f"{path}:{lineno}: text must be a string")
            docs.append(
                Document(
                    doc_id=doc_id,
                    source=str(obj.get("source") or ""),
                    published=_parse_published(obj.get("published"), path, lineno),
                    text=text,
                )
            )
    return docs


def _parse_published(raw: object, path: Path, lineno: int) -> date | None:
    if raw is None:
        return None
    if not isinstance(raw, str):
        raise InputError(f"{path}:{lineno}: published must be an ISO date string")
    try:
        return date.fromisoformat(raw)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(raw).date()
    except ValueError:
        raise InputError(f"{path}:{lineno}: bad published date {raw!r}") from None


def write_corpus(path: str | Path, docs: Iterable[Document]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in docs:
            obj = {
                "doc_id": doc.doc_id,
                "source": doc.source,
                "published": doc.published.isoformat() if doc.published else None,
                "text": doc.text,
            }
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def filter_by_date(
    docs: Iterable[Document],
    date_from: date | None = None,
    date_to: date | None = None,
) -> list[Document]:
    """Keep documents published within the inclusive window.

    With no bounds this is the identity. When a bound is set, documents
    without a published date are excluded (they cannot be shown to fall
    inside the window).
    """
    if date_from is None and date_to is None:
        return list(docs)
    kept = []
    for doc in docs:
        if doc.published is None:
            continue
        if date_from is not None and doc.published < date_from:
            continue
        if date_to is not None and doc.published > date_to:
            continue
        kept.append(doc)
    return kept


def entity_db_csv_text(db: EntityDB) -> str:
    """The hit table as CSV text. Documents without hits leave no rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ENTITYDB_HEADER)
    for r in db.records:
        writer.writerow(
            (r.doc_id, r.category.value, r.canonical, r.matched_phrase, r.start, r.end)
        )
    return buf.getvalue()


def write_entity_db(path: str | Path, db: EntityDB) -> None:
    Path(path).write_text(entity_db_csv_text(db), encoding="utf-8", newline="")


def read_entity_db(path: str | Path) -> EntityDB:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"entity database not found: {path}")
    records: list[EntityRecord] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return EntityDB.from_records(())
        if tuple(header) != ENTITYDB_HEADER:
            raise InputError(
                f"{path}: expected header {','.join(ENTITYDB_HEADER)}"
            )
        for row in reader:
            line = reader.line_num
            if len(row) != len(ENTITYDB_HEADER):
                raise InputError(f"{path}:{line}: expected {len(ENTITYDB_HEADER)} fields")
            doc_id, cat_label, canonical, phrase, start_s, end_s = row
            try:
                category = EntityCategory.parse(cat_label)
            except ValueError as exc:
                raise InputError(f"{path}:{line}: {exc}") from None
            try:
                start, end = int(start_s), int(end_s)
            except ValueError:
                raise InputError(f"{path}:{line}: span must be integers") from None
            if not doc_id or not canonical or start < 0 or start >= end:
                raise InputError(f"{path}:{line}: malformed record")
            records.append(EntityRecord(doc_id, category, canonical, phrase, start, end))
    return EntityDB.from_records(records)
