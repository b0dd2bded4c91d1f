from __future__ import annotations

import random
from pathlib import Path

import pytest

from arminer.miner import AssociationRule, RuleMetrics, RuleSet
from arminer.refbase import load_reference_dir
from arminer.transactions import Transaction

DATA_DIR = Path(__file__).parent / "data"
REFBASE_DIR = DATA_DIR / "refbase"
CORPUS_PATH = DATA_DIR / "corpus.jsonl"
GOLDEN_DIR = DATA_DIR / "golden"


@pytest.fixture(scope="session")
def bases():
    return load_reference_dir(REFBASE_DIR)


def make_rule(
    actor: str,
    antecedent: str,
    consequent: str,
    *,
    pair: int = 2,
    asup: int = 2,
    csup: int = 2,
    n: int = 10,
    confidence: float | None = None,
    lift: float | None = None,
) -> AssociationRule:
    """Rule with stored metrics; confidence/lift default to the derived values."""
    if confidence is None:
        confidence = pair / asup
    if lift is None:
        lift = (pair * n) / (asup * csup)
    return AssociationRule(
        actor, antecedent, consequent,
        RuleMetrics(pair, asup, csup, n, confidence, lift),
    )


def make_ruleset(actor: str, pairs) -> RuleSet:
    """RuleSet over bare ordered pairs, identical dummy metrics."""
    return RuleSet.build(
        actor, None, [make_rule(actor, a, b) for a, b in pairs]
    )


def make_transactions(actor: str, item_sets) -> list[Transaction]:
    return [
        Transaction(f"{actor.lower()}-{i:03d}", actor, frozenset(items))
        for i, items in enumerate(item_sets)
    ]


def random_item_sets(rng: random.Random, max_n: int = 60, max_vocab: int = 15):
    """A small random transaction database for oracle-equivalence checks."""
    vocab = [f"T{1000 + i}" for i in range(rng.randint(2, max_vocab))]
    n = rng.randint(0, max_n)
    sets = []
    for _ in range(n):
        size = rng.randint(1, min(len(vocab), 6))
        sets.append(frozenset(rng.sample(vocab, size)))
    return sets
