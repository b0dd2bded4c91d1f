from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from arminer.errors import InputError
from arminer.refbase import (
    EntityCategory,
    load_refbase,
    load_reference_dir,
    normalize,
    resolve_alias,
    technique_name_map,
)

from conftest import REFBASE_DIR

# Vendor alias lists are ASCII-ish; full Unicode case-folding corner cases
# (Turkish dotless i and friends) are out of scope for this gazetteer.
_ALIAS_ALPHABET = (
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 -_./()'é"
)


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_normalize_examples():
    assert normalize("  Fancy   BEAR ") == "fancy bear"
    assert normalize("(Sofacy).") == "sofacy"
    assert normalize("tsar\tteam") == "tsar team"
    assert normalize("Café") == normalize("Café")  # NFC unifies accents


@given(st.text())
def test_normalize_idempotent(s):
    assert normalize(normalize(s)) == normalize(s)


@given(st.text(alphabet=_ALIAS_ALPHABET, min_size=1))
def test_normalize_case_insensitive(s):
    assert normalize(s.upper()) == normalize(s.lower())


def test_category_round_trip():
    assert len(EntityCategory) == 5
    for cat in EntityCategory:
        assert EntityCategory.parse(cat.value) is cat
    with pytest.raises(ValueError):
        EntityCategory.parse("Actor")


@pytest.fixture(scope="module")
def actors_base():
    return load_refbase(REFBASE_DIR / "actors.csv", EntityCategory.THREAT_ACTOR)


def test_resolve_known_aliases(actors_base):
    assert resolve_alias(actors_base, "Fancy Bear") == [
        ("APT28", EntityCategory.THREAT_ACTOR)
    ]
    assert resolve_alias(actors_base, "sandworm team") == [
        ("ELECTRUM", EntityCategory.THREAT_ACTOR)
    ]
    assert resolve_alias(actors_base, "zzzz-not-an-alias") == []


def test_resolve_is_case_insensitive(actors_base):
    for surface in ("sofacy", "SOFACY", "Sofacy"):
        assert resolve_alias(actors_base, surface) == [
            ("APT28", EntityCategory.THREAT_ACTOR)
        ]


def test_every_entry_resolves_to_itself(bases):
    for base in bases.values():
        for entry in base.entries:
            assert (entry.canonical_name, entry.category) in resolve_alias(
                base, entry.alias
            )


def test_empty_and_header_only_files(tmp_path):
    empty = _write(tmp_path, "empty.csv", "")
    base = load_refbase(empty, EntityCategory.MALWARE)
    assert len(base) == 0
    header = _write(tmp_path, "hdr.csv", "canonical_name,alias,category,technique_id\n")
    assert len(load_refbase(header, EntityCategory.MALWARE)) == 0


def test_duplicate_rows_collapse(tmp_path):
    path = _write(
        tmp_path,
        "dup.csv",
        "canonical_name,alias,category\n"
        "APT28,sofacy,ThreatActor\n"
        "APT28,sofacy,ThreatActor\n",
    )
    base = load_refbase(path, EntityCategory.THREAT_ACTOR)
    assert len(base) == 1


def test_ambiguous_alias_kept_and_flagged(tmp_path):
    path = _write(
        tmp_path,
        "amb.csv",
        "canonical_name,alias,category\n"
        "ZEUS-A,zeus,Malware\n"
        "ZEUS-B,zeus,Malware\n",
    )
    base = load_refbase(path, EntityCategory.MALWARE)
    assert {c for c, _ in resolve_alias(base, "zeus")} == {"ZEUS-A", "ZEUS-B"}
    assert len(base.ambiguities) == 1
    assert "zeus" in base.ambiguities[0]


@pytest.mark.parametrize(
    "row,fragment",
    [
        ("APT28,,ThreatActor", "canonical_name, alias and category"),
        ("APT28,apt28,NotACategory", "unknown entity category"),
        ("APT28,apt28,Malware", "expected ThreatActor"),
        ("APT28,'(',ThreatActor", "normalizes to nothing"),
        ("APT28,apt28,ThreatActor,T1000", "only valid on Technique rows"),
    ],
)
def test_malformed_rows_name_the_line(tmp_path, row, fragment):
    path = _write(
        tmp_path,
        "bad.csv",
        "canonical_name,alias,category,technique_id\n"
        "OK,fine,ThreatActor,\n" + row + "\n",
    )
    with pytest.raises(InputError) as err:
        load_refbase(path, EntityCategory.THREAT_ACTOR)
    assert ":3:" in str(err.value)
    assert fragment in str(err.value)


def test_technique_rows_need_ids(tmp_path):
    path = _write(
        tmp_path,
        "tech.csv",
        "canonical_name,alias,category,technique_id\n"
        "Rundll32,rundll32,Technique,\n",
    )
    with pytest.raises(InputError, match="T1024"):
        load_refbase(path, EntityCategory.TECHNIQUE)


def test_unknown_column_rejected(tmp_path):
    path = _write(tmp_path, "cols.csv", "canonical_name,alias,category,extra\n")
    with pytest.raises(InputError, match="unknown column"):
        load_refbase(path, EntityCategory.CVE)


def test_missing_file_and_missing_dir(tmp_path):
    with pytest.raises(InputError, match="not found"):
        load_refbase(tmp_path / "nope.csv", EntityCategory.CVE)
    with pytest.raises(InputError, match="missing reference file"):
        load_reference_dir(tmp_path)


def test_reference_dir_loads_all_categories(bases):
    assert set(bases) == set(EntityCategory)
    assert len(bases[EntityCategory.THREAT_ACTOR]) > 0


def test_technique_name_map(bases):
    names = technique_name_map(bases)
    assert names["T1024"] == "Custom Cryptographic Protocol"
    assert names["T1085"] == "Rundll32"
