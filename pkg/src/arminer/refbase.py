"""Alias reference bases mapping surface strings to canonical entities.

A reference base is a per-category table of (canonical_name, alias) rows
loaded from CSV. Aliases are normalized once at load time and queries are
normalized the same way, so lookups are insensitive to case, whitespace
layout, and surrounding punctuation. A loaded base is immutable and safe
to share across worker threads.
"""

from __future__ import annotations

import csv
import logging
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .errors import InputError

logger = logging.getLogger(__name__)

TECHNIQUE_ID_PATTERN = re.compile(r"^T\d{4}$")
_WS_RUN = re.compile(r"\s+")

REFBASE_HEADER = ("canonical_name", "alias", "category", "technique_id")
_REQUIRED_COLUMNS = ("canonical_name", "alias", "category")


class EntityCategory(Enum):
    """Entity kinds tracked by the pipeline."""

    CVE = "CVE"
    LOCATION = "Location"
    MALWARE = "Malware"
    TECHNIQUE = "Technique"
    THREAT_ACTOR = "ThreatActor"

    @classmethod
    def parse(cls, label: str) -> "EntityCategory":
        try:
            return _CATEGORY_BY_LABEL[label]
        except KeyError:
            raise ValueError(f"unknown entity category {label!r}") from None


_CATEGORY_BY_LABEL = {cat.value: cat for cat in EntityCategory}

# Expected files inside a reference-base directory.
REFBASE_FILENAMES: Mapping[str, EntityCategory] = {
    "actors.csv": EntityCategory.THREAT_ACTOR,
    "malware.csv": EntityCategory.MALWARE,
    "techniques.csv": EntityCategory.TECHNIQUE,
    "locations.csv": EntityCategory.LOCATION,
    "cves.csv": EntityCategory.CVE,
}


def normalize(surface: str) -> str:
    """Normalize a surface string for alias matching.

    Casefolds, applies Unicode NFC, collapses whitespace runs to a single
    space, and strips surrounding whitespace and punctuation. Idempotent:
    normalize(normalize(s)) == normalize(s).
    """
    folded = unicodedata.normalize("NFC", surface.casefold())
    collapsed = _WS_RUN.sub(" ", folded)
    return _strip_outer(collapsed)


def _strip_outer(s: str) -> str:
    start, end = 0, len(s)
    while start < end and _is_outer_junk(s[start]):
        start += 1
    while end > start and _is_outer_junk(s[end - 1]):
        end -= 1
    return s[start:end]


def _is_outer_junk(ch: str) -> bool:
    return ch.isspace() or unicodedata.category(ch).startswith("P")


@dataclass(frozen=True)
class RefEntry:
    """One alias row: a normalized surface form for a canonical entity."""

    canonical_name: str
    alias: str  # stored normalized
    category: EntityCategory
    technique_id: str | None = None  # present iff category is TECHNIQUE


@dataclass
class ReferenceBase:
    """All alias entries of one category plus a normalized-alias index."""

    category: EntityCategory
    entries: frozenset[RefEntry]
    index: dict[str, list[RefEntry]] = field(repr=False)
    ambiguities: list[str] = field(default_factory=list, repr=False)

    @classmethod
    def from_entries(
        cls, category: EntityCategory, entries: Iterable[RefEntry]
    ) -> "ReferenceBase":
        entry_set = frozenset(entries)
        index: dict[str, list[RefEntry]] = {}
        for entry in sorted(
            entry_set, key=lambda e: (e.canonical_name, e.technique_id or "")
        ):
            index.setdefault(entry.alias, []).append(entry)
        ambiguities = []
        for alias, hits in sorted(index.items()):
            canonicals = sorted({e.canonical_name for e in hits})
            if len(canonicals) > 1:
                msg = (
                    f"alias {alias!r} maps to multiple {category.value} "
                    f"entities: {', '.join(canonicals)}"
                )
                ambiguities.append(msg)
                logger.warning("%s", msg)
        return cls(category, entry_set, index, ambiguities)

    def lookup(self, surface: str) -> list[RefEntry]:
        """All entries whose alias equals the normalized surface string."""
        return list(self.index.get(normalize(surface), ()))

    def __len__(self) -> int:
        return len(self.entries)


def resolve_alias(
    base: ReferenceBase, surface: str
) -> list[tuple[str, EntityCategory]]:
    """Resolve a surface string to (canonical_name, category) candidates.

    Returns an empty list when nothing matches; never raises.
    """
    seen: list[tuple[str, EntityCategory]] = []
    for entry in base.lookup(surface):
        pair = (entry.canonical_name, entry.category)
        if pair not in seen:
            seen.append(pair)
    return seen


def load_refbase(path: str | Path, category: EntityCategory) -> ReferenceBase:
    """Load one reference-base CSV, validating and normalizing every row.

    Duplicate (alias, canonical) rows collapse to one entry. An alias that
    maps to several canonicals in the same category is kept in full and
    recorded as an ambiguity warning.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"reference base not found: {path}")
    entries: dict[tuple[str, str, str], RefEntry] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, restkey="_extra")
        fields = reader.fieldnames
        if fields is None:
            return ReferenceBase.from_entries(category, ())
        missing = [c for c in _REQUIRED_COLUMNS if c not in fields]
        if missing:
            raise InputError(f"{path}: missing column(s): {', '.join(missing)}")
        unknown = [c for c in fields if c not in REFBASE_HEADER]
        if unknown:
            raise InputError(f"{path}: unknown column(s): {', '.join(unknown)}")
        for row in reader:
            line = reader.line_num
            if row.get("_extra"):
                raise InputError(f"{path}:{line}: too many fields")
            entry = _parse_row(row, category, path, line)
            key = (entry.alias, entry.canonical_name, entry.technique_id or "")
            entries.setdefault(key, entry)
    return ReferenceBase.from_entries(category, entries.values())


def _parse_row(
    row: Mapping[str, str | None],
    category: EntityCategory,
    path: Path,
    line: int,
) -> RefEntry:
    canonical = (row.get("canonical_name") or "").strip()
    alias_raw = row.get("alias") or ""
    cat_label = (row.get("category") or "").strip()
    if not canonical or not alias_raw.strip() or not cat_label:
        raise InputError(
            f"{path}:{line}: row must supply canonical_name, alias and category"
        )
    try:
        row_cat = EntityCategory.parse(cat_label)
    except ValueError as exc:
        raise InputError(f"{path}:{line}: {exc}") from None
    if row_cat is not category:
        raise InputError(
            f"{path}:{line}: expected {category.value} row, got {row_cat.value}"
        )
    alias = normalize(alias_raw)
    if not alias:
        raise InputError(f"{path}:{line}: alias {alias_raw!r} normalizes to nothing")
    tid = (row.get("technique_id") or "").strip()
    if category is EntityCategory.TECHNIQUE:
        if not TECHNIQUE_ID_PATTERN.match(tid):
            raise InputError(
                f"{path}:{line}: technique rows need a technique_id like T1024"
            )
        return RefEntry(canonical, alias, category, tid)
    if tid:
        raise InputError(
            f"{path}:{line}: technique_id is only valid on Technique rows"
        )
    return RefEntry(canonical, alias, category)


def load_reference_dir(path: str | Path) -> dict[EntityCategory, ReferenceBase]:
    """Load the five per-category reference bases from one directory."""
    path = Path(path)
    if not path.is_dir():
        raise InputError(f"reference-base directory not found: {path}")
    missing = [name for name in REFBASE_FILENAMES if not (path / name).is_file()]
    if missing:
        raise InputError(f"{path}: missing reference file(s): {', '.join(missing)}")
    return {
        category: load_refbase(path / name, category)
        for name, category in REFBASE_FILENAMES.items()
    }


def technique_name_map(
    source: ReferenceBase | Mapping[EntityCategory, ReferenceBase],
) -> dict[str, str]:
    """Map ATT&CK technique IDs to display names from a techniques base."""
    if isinstance(source, ReferenceBase):
        base = source
    else:
        base = source.get(EntityCategory.TECHNIQUE)
        if base is None:
            return {}
    names: dict[str, str] = {}
    for entry in sorted(
        base.entries, key=lambda e: (e.technique_id or "", e.canonical_name)
    ):
        if entry.technique_id is not None:
            names.setdefault(entry.technique_id, entry.canonical_name)
    return names
