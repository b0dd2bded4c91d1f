from __future__ import annotations

import pytest

from arminer.errors import InputError, UnknownDocumentError
from arminer.extraction import EntityDB, EntityRecord, build_entity_db, read_corpus
from arminer.refbase import EntityCategory
from arminer.transactions import (
    ItemMode,
    Transaction,
    build_transaction_table,
    qualify_document,
    read_transactions,
    write_transactions,
)

from conftest import CORPUS_PATH

_A = EntityCategory.THREAT_ACTOR
_T = EntityCategory.TECHNIQUE
_M = EntityCategory.MALWARE
_C = EntityCategory.CVE


def _db(doc_entities, extra_docs=()):
    """EntityDB from {doc_id: [(category, canonical), ...]} shorthand."""
    records = []
    for doc_id, entities in doc_entities.items():
        for i, (category, canonical) in enumerate(entities):
            records.append(
                EntityRecord(doc_id, category, canonical, canonical, i * 10, i * 10 + 5)
            )
    return EntityDB.from_records(records, known_docs=list(doc_entities) + list(extra_docs))


@pytest.fixture(scope="module")
def corpus_db(bases):
    return build_entity_db(read_corpus(CORPUS_PATH), bases)


def test_qualifying_document():
    db = _db({"x": [(_A, "APT28"), (_T, "T1024"), (_T, "T1037")]})
    txn = qualify_document(db, "x")
    assert txn == Transaction("x", "APT28", frozenset({"T1024", "T1037"}))


def test_multi_actor_document_excluded():
    db = _db({"x": [(_A, "APT28"), (_A, "TURLA"), (_T, "T1024"), (_T, "T1037")]})
    assert qualify_document(db, "x") is None


def test_single_technique_document_excluded():
    db = _db({"x": [(_A, "APT28"), (_T, "T1024")]})
    assert qualify_document(db, "x") is None


def test_no_actor_document_excluded():
    db = _db({"x": [(_T, "T1024"), (_T, "T1037")]})
    assert qualify_document(db, "x") is None


def test_unknown_doc_id():
    db = _db({"x": [(_A, "APT28")]})
    with pytest.raises(UnknownDocumentError):
        qualify_document(db, "nope")


def test_repeated_mentions_count_once():
    db = _db({"x": [(_A, "APT28"), (_T, "T1024"), (_T, "T1024"), (_T, "T1037")]})
    txn = qualify_document(db, "x")
    assert txn.items == frozenset({"T1024", "T1037"})


def test_intrusion_set_mode_widens_items_not_the_gate():
    entities = [(_A, "APT28"), (_T, "T1024"), (_T, "T1037"), (_M, "X-Agent"), (_C, "CVE-2017-0144")]
    db = _db({"x": entities})
    technique = qualify_document(db, "x", ItemMode.TECHNIQUE_ONLY)
    intrusion = qualify_document(db, "x", ItemMode.INTRUSION_SET)
    assert technique.items == frozenset({"T1024", "T1037"})
    assert intrusion.items == frozenset(
        {"Technique:T1024", "Technique:T1037", "Malware:X-Agent", "CVE:CVE-2017-0144"}
    )
    # malware alone cannot substitute for the two-technique requirement
    db2 = _db({"y": [(_A, "APT28"), (_T, "T1024"), (_M, "X-Agent")]})
    assert qualify_document(db2, "y", ItemMode.INTRUSION_SET) is None


def test_build_table_applies_predicate_everywhere():
    db = _db(
        {
            "a": [(_A, "APT28"), (_T, "T1024"), (_T, "T1037")],
            "b": [(_A, "APT28"), (_A, "TURLA"), (_T, "T1024"), (_T, "T1037")],
            "c": [(_A, "TURLA"), (_T, "T1002"), (_T, "T1219")],
        }
    )
    table = build_transaction_table(db)
    assert [t.doc_id for t in table.transactions] == ["a", "c"]


def test_build_table_empty_db():
    assert build_transaction_table(_db({})).transactions == []


def test_build_table_all_multi_actor():
    db = _db(
        {
            "a": [(_A, "X"), (_A, "Y"), (_T, "T1"), (_T, "T2")],
            "b": [(_A, "X"), (_A, "Z"), (_T, "T1"), (_T, "T2")],
        }
    )
    assert build_transaction_table(db).transactions == []


def test_partition_invariant(corpus_db):
    table = build_transaction_table(corpus_db)
    assert sum(len(v) for v in table.by_actor.values()) == len(table.transactions)
    for actor, txns in table.by_actor.items():
        assert all(t.actor == actor for t in txns)


def test_mode_monotonicity(corpus_db):
    technique = build_transaction_table(corpus_db, ItemMode.TECHNIQUE_ONLY)
    intrusion = build_transaction_table(corpus_db, ItemMode.INTRUSION_SET)
    assert [t.doc_id for t in technique.transactions] == [
        t.doc_id for t in intrusion.transactions
    ]


def test_golden_corpus_qualification(corpus_db):
    table = build_transaction_table(corpus_db)
    assert len(table.transactions) == 21
    excluded = {"d20", "d21", "d22", "d23"}
    assert excluded.isdisjoint({t.doc_id for t in table.transactions})
    assert set(table.by_actor) == {"APT28", "TURLA", "COVELLITE"}


def test_items_always_at_least_two(corpus_db):
    for mode in ItemMode:
        for txn in build_transaction_table(corpus_db, mode).transactions:
            assert len(txn.items) >= 2


def test_jsonl_round_trip(tmp_path, corpus_db):
    for mode in ItemMode:
        table = build_transaction_table(corpus_db, mode)
        path = tmp_path / f"{mode.value}.jsonl"
        write_transactions(path, table)
        assert read_transactions(path) == table


def test_read_transactions_validation(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"doc_id": "a", "actor": "X", "items": ["T1"]}\n', encoding="utf-8")
    with pytest.raises(InputError, match=">= 2 items"):
        read_transactions(path)
    path.write_text(
        '{"doc_id": "a", "actor": "X", "items": ["T1", "T2"]}\n'
        '{"doc_id": "a", "actor": "X", "items": ["T1", "T2"]}\n',
        encoding="utf-8",
    )
    with pytest.raises(InputError, match="duplicate doc_id"):
        read_transactions(path)
    with pytest.raises(InputError, match="not found"):
        read_transactions(tmp_path / "missing.jsonl")
