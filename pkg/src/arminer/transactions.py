"""Turn the entity database into per-actor transaction tables.

A document qualifies when it names exactly one distinct threat actor and
at least two distinct techniques. Items are sets: repeated mentions of a
technique in one document count once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import InputError
from .extraction import EntityDB
from .refbase import EntityCategory


class ItemMode(Enum):
    """Item vocabulary: bare technique IDs, or the category-tagged union of
    techniques, malware, and CVEs."""

    TECHNIQUE_ONLY = "technique"
    INTRUSION_SET = "intrusion-set"

    @classmethod
    def parse(cls, label: str) -> "ItemMode":
        for mode in cls:
            if mode.value == label:
                return mode
        raise ValueError(f"unknown item mode {label!r}")


def tag_item(category: EntityCategory, value: str) -> str:
    return f"{category.value}:{value}"


@dataclass(frozen=True)
class Transaction:
    doc_id: str
    actor: str
    items: frozenset[str]


@dataclass
class TransactionTable:
    mode: ItemMode
    transactions: list[Transaction]
    by_actor: dict[str, list[Transaction]]

    def __len__(self) -> int:
        return len(self.transactions)


def qualify_document(
    db: EntityDB, doc_id: str, mode: ItemMode = ItemMode.TECHNIQUE_ONLY
) -> Transaction | None:
    """Apply the qualification predicate to one document.

    Returns a Transaction iff the document has exactly one distinct actor
    and two or more distinct techniques; otherwise None. The gate is the
    same in both modes; intrusion-set mode only widens the item set.
    """
    records = db.doc_records(doc_id)
    actors = {r.canonical for r in records if r.category is EntityCategory.THREAT_ACTOR}
    techniques = {r.canonical for r in records if r.category is EntityCategory.TECHNIQUE}
    if len(actors) != 1 or len(techniques) < 2:
        return None
    actor = next(iter(actors))
    if mode is ItemMode.TECHNIQUE_ONLY:
        items = frozenset(techniques)
    else:
        items = frozenset(
            tag_item(r.category, r.canonical)
            for r in records
            if r.category
            in (EntityCategory.TECHNIQUE, EntityCategory.MALWARE, EntityCategory.CVE)
        )
    return Transaction(doc_id, actor, items)


def build_transaction_table(
    db: EntityDB, mode: ItemMode = ItemMode.TECHNIQUE_ONLY
) -> TransactionTable:
    """Qualify every document; output is ordered by doc_id."""
    transactions = []
    for doc_id in db.by_doc:  # by_doc keys are already sorted
        txn = qualify_document(db, doc_id, mode)
        if txn is not None:
            transactions.append(txn)
    return TransactionTable(mode, transactions, _group_by_actor(transactions))


def _group_by_actor(transactions: Iterable[Transaction]) -> dict[str, list[Transaction]]:
    groups: dict[str, list[Transaction]] = {}
    for txn in transactions:
        groups.setdefault(txn.actor, []).append(txn)
    return {actor: groups[actor] for actor in sorted(groups)}


def transactions_jsonl_text(table: TransactionTable) -> str:
    lines = []
    for txn in table.transactions:
        obj = {
            "doc_id": txn.doc_id,
            "actor": txn.actor,
            "items": sorted(txn.items),
        }
        lines.append(json.dumps(obj, ensure_ascii=False) + "\n")
    return "".join(lines)


def write_transactions(path: str | Path, table: TransactionTable) -> None:
    Path(path).write_text(transactions_jsonl_text(table), encoding="utf-8")


def read_transactions(path: str | Path) -> TransactionTable:
    """Read a JSON-Lines transaction table.

    The item mode is recovered from the item shape: tagged items carry a
    ``Category:`` prefix, bare ATT&CK IDs mean technique-only mode.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"transaction table not found: {path}")
    transactions: list[Transaction] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            doc_id = obj.get("doc_id")
            actor = obj.get("actor")
            items = obj.get("items")
            if not isinstance(doc_id, str) or not doc_id:
                raise InputError(f"{path}:{lineno}: doc_id must be a non-empty string")
            if not isinstance(actor, str) or not actor:
                raise InputError(f"{path}:{lineno}: actor must be a non-empty string")
            if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
                raise InputError(f"{path}:{lineno}: items must be a list of strings")
            if len(set(items)) < 2:
                raise InputError(f"{path}:{lineno}: a transaction needs >= 2 items")
            if doc_id in seen:
                raise InputError(f"{path}:{lineno}: duplicate doc_id {doc_id}")
            seen.add(doc_id)
            transactions.append(Transaction(doc_id, actor, frozenset(items)))
    mode = (
        ItemMode.INTRUSION_SET
        if any(":" in item for txn in transactions for item in txn.items)
        else ItemMode.TECHNIQUE_ONLY
    )
    return TransactionTable(mode, transactions, _group_by_actor(transactions))
