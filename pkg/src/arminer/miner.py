"""Directed one-to-one association rule mining over actor transactions.

Rules have exactly one antecedent item and one consequent item, and are
directed: A->B and B->A are distinct rules. All counting happens within a
single actor's transaction group, so supports and thresholds are relative
to that actor's document count N.

Thresholds (all inclusive):

* candidate support   CS = cs_base + ceil(cs_fraction * N)
* antecedent support  AS = as_multiplier * CS
* confidence          pair_support / antecedent_support >= min_confidence
* lift                optional floor; lift = confidence / (consequent_support / N)

Absolute overrides (cs_absolute / as_absolute) replace the derived values
when set. The Apriori step is deliberately shallow: the 1->1 rule shape
means level-2 itemsets are the frontier, so we prune items below CS and
count co-occurring pairs in one pass.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InputError
from .transactions import Transaction, TransactionTable

RULES_HEADER = (
    "actor",
    "antecedent",
    "consequent",
    "pair_support",
    "antecedent_support",
    "consequent_support",
    "n",
    "confidence",
    "lift",
)

# A brute-force enumeration guard; 20 items means 380 ordered pairs.
BRUTE_FORCE_VOCAB_LIMIT = 20


@dataclass(frozen=True)
class MiningParams:
    cs_base: int = 3
    cs_fraction: float = 0.02
    as_multiplier: float = 2.0
    min_confidence: float = 0.5
    min_lift: float | None = None
    cs_absolute: int | None = None
    as_absolute: int | None = None

    def __post_init__(self) -> None:
        if self.cs_base < 0:
            raise ValueError("cs_base must be >= 0")
        if not 0.0 <= self.cs_fraction <= 1.0:
            raise ValueError("cs_fraction must be within [0, 1]")
        if self.as_multiplier <= 0:
            raise ValueError("as_multiplier must be > 0")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be within [0, 1]")
        if self.min_lift is not None and self.min_lift < 0:
            raise ValueError("min_lift must be >= 0")
        if self.cs_absolute is not None and self.cs_absolute < 0:
            raise ValueError("cs_absolute must be >= 0")
        if self.as_absolute is not None and self.as_absolute < 0:
            raise ValueError("as_absolute must be >= 0")


@dataclass(frozen=True)
class RuleMetrics:
    pair_support: int
    antecedent_support: int
    consequent_support: int
    n: int
    confidence: float
    lift: float

    @classmethod
    def from_counts(
        cls, pair_support: int, antecedent_support: int, consequent_support: int, n: int
    ) -> "RuleMetrics":
        if antecedent_support <= 0:
            raise ValueError("antecedent never occurs: rule undefined")
        if consequent_support <= 0:
            raise ValueError("consequent never occurs: lift undefined")
        if pair_support > min(antecedent_support, consequent_support):
            raise ValueError("pair_support cannot exceed either item support")
        if max(antecedent_support, consequent_support) > n:
            raise ValueError("item support cannot exceed transaction count")
        confidence = pair_support / antecedent_support
        # Single division keeps lift exactly symmetric in (A, B).
        lift = (pair_support * n) / (antecedent_support * consequent_support)
        return cls(pair_support, antecedent_support, consequent_support, n, confidence, lift)


@dataclass(frozen=True)
class AssociationRule:
    actor: str
    antecedent: str
    consequent: str
    metrics: RuleMetrics

    def __post_init__(self) -> None:
        if self.antecedent == self.consequent:
            raise ValueError("a rule cannot relate an item to itself")

    @property
    def pair(self) -> tuple[str, str]:
        return (self.antecedent, self.consequent)


def rule_sort_key(rule: AssociationRule):
    m = rule.metrics
    return (-m.lift, -m.pair_support, -m.confidence, rule.antecedent, rule.consequent)


@dataclass
class RuleSet:
    """An actor's rules in canonical order (lift desc first).

    ``params`` records how the set was mined; imported artifacts carry
    None there, so it does not participate in equality.
    """

    actor: str
    params: MiningParams | None = field(compare=False, default=None)
    rules: list[AssociationRule] = field(default_factory=list)

    @classmethod
    def build(
        cls,
        actor: str,
        params: MiningParams | None,
        rules: Iterable[AssociationRule],
    ) -> "RuleSet":
        ordered = sorted(rules, key=rule_sort_key)
        pairs = [r.pair for r in ordered]
        if len(pairs) != len(set(pairs)):
            raise ValueError(f"duplicate ordered pair in rule set for {actor}")
        return cls(actor, params, ordered)

    def __len__(self) -> int:
        return len(self.rules)


def candidate_support_threshold(params: MiningParams, n: int) -> int:
    """Minimum pair/item support: cs_base plus ceil(cs_fraction * n).

    The fraction is applied in exact arithmetic so that e.g. 2% of 50 is
    exactly 1, not a float a hair above it.
    """
    if n < 0:
        raise ValueError("transaction count must be >= 0")
    if params.cs_absolute is not None:
        return params.cs_absolute
    return params.cs_base + math.ceil(Fraction(str(params.cs_fraction)) * n)


def antecedent_support_threshold(params: MiningParams, n: int) -> float:
    if params.as_absolute is not None:
        return float(params.as_absolute)
    return params.as_multiplier * candidate_support_threshold(params, n)


def _as_item_sets(
    transactions: Iterable[Transaction | frozenset[str] | set[str]],
) -> list[frozenset[str]]:
    sets = []
    for txn in transactions:
        if isinstance(txn, Transaction):
            sets.append(txn.items)
        else:
            sets.append(frozenset(txn))
    return sets


def compute_rule_metrics(
    transactions: Iterable[Transaction | frozenset[str] | set[str]],
    antecedent: str,
    consequent: str,
) -> RuleMetrics:
    """Count supports for one ordered pair over one actor's transactions."""
    if antecedent == consequent:
        raise ValueError("antecedent and consequent must differ")
    sets = _as_item_sets(transactions)
    n = len(sets)
    a_sup = sum(1 for s in sets if antecedent in s)
    c_sup = sum(1 for s in sets if consequent in s)
    pair = sum(1 for s in sets if antecedent in s and consequent in s)
    return RuleMetrics.from_counts(pair, a_sup, c_sup, n)


def mine_actor_rules(
    table: TransactionTable, actor: str, params: MiningParams
) -> RuleSet:
    """Mine one actor's rules with item-level Apriori pruning.

    Items below CS cannot appear in a qualifying pair (a pair's support is
    bounded by either item's support), so only frequent items enter the
    pair-counting pass.
    """
    transactions = table.by_actor.get(actor, [])
    return _mine(actor, _as_item_sets(transactions), params)


def _mine(actor: str, sets: list[frozenset[str]], params: MiningParams) -> RuleSet:
    n = len(sets)
    cs = candidate_support_threshold(params, n)
    as_threshold = antecedent_support_threshold(params, n)

    item_support: Counter[str] = Counter()
    for items in sets:
        item_support.update(items)
    frequent = {item for item, sup in item_support.items() if sup >= cs}

    pair_support: Counter[tuple[str, str]] = Counter()
    for items in sets:
        present = sorted(item for item in items if item in frequent)
        for pair in combinations(present, 2):
            pair_support[pair] += 1

    rules = []
    for (x, y), pair_count in pair_support.items():
        if pair_count < cs:
            continue
        for antecedent, consequent in ((x, y), (y, x)):
            a_sup = item_support[antecedent]
            if a_sup < as_threshold:
                continue
            metrics = RuleMetrics.from_counts(
                pair_count, a_sup, item_support[consequent], n
            )
            if metrics.confidence < params.min_confidence:
                continue
            if params.min_lift is not None and metrics.lift < params.min_lift:
                continue
            rules.append(AssociationRule(actor, antecedent, consequent, metrics))
    return RuleSet.build(actor, params, rules)


def brute_force_rules(
    actor: str,
    transactions: Iterable[Transaction | frozenset[str] | set[str]],
    params: MiningParams,
) -> RuleSet:
    """Oracle miner: enumerate every ordered item pair and count directly.

    No pruning and no shared counting structures; exists to check
    mine_actor_rules. A pair that never co-occurs is not a rule, matching
    the miner (which only ever sees co-occurring pairs).
    """
    sets = _as_item_sets(transactions)
    vocab = sorted({item for items in sets for item in items})
    if len(vocab) > BRUTE_FORCE_VOCAB_LIMIT:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_VOCAB_LIMIT} items, got {len(vocab)}"
        )
    n = len(sets)
    cs = candidate_support_threshold(params, n)
    as_threshold = antecedent_support_threshold(params, n)
    rules = []
    for antecedent in vocab:
        for consequent in vocab:
            if antecedent == consequent:
                continue
            pair = sum(1 for s in sets if antecedent in s and consequent in s)
            if pair == 0 or pair < cs:
                continue
            a_sup = sum(1 for s in sets if antecedent in s)
            if a_sup < as_threshold:
                continue
            c_sup = sum(1 for s in sets if consequent in s)
            confidence = pair / a_sup
            if confidence < params.min_confidence:
                continue
            lift = (pair * n) / (a_sup * c_sup)
            if params.min_lift is not None and lift < params.min_lift:
                continue
            rules.append(
                AssociationRule(
                    actor,
                    antecedent,
                    consequent,
                    RuleMetrics(pair, a_sup, c_sup, n, confidence, lift),
                )
            )
    return RuleSet.build(actor, params, rules)


def mine_all(
    table: TransactionTable,
    params: MiningParams,
    actors: Sequence[str] | None = None,
) -> list[RuleSet]:
    """Mine every actor (or a selection), sorted lexicographically."""
    selected = sorted(table.by_actor) if actors is None else sorted(set(actors))
    return [mine_actor_rules(table, actor, params) for actor in selected]


# ---------------------------------------------------------------------------
# Rule artifact formats


def _rule_row(rule: AssociationRule) -> dict[str, object]:
    m = rule.metrics
    return {
        "actor": rule.actor,
        "antecedent": rule.antecedent,
        "consequent": rule.consequent,
        "pair_support": m.pair_support,
        "antecedent_support": m.antecedent_support,
        "consequent_support": m.consequent_support,
        "n": m.n,
        "confidence": m.confidence,
        "lift": m.lift,
    }


def _iter_rules(rulesets: Iterable[RuleSet]) -> list[AssociationRule]:
    ordered = sorted(rulesets, key=lambda rs: rs.actor)
    return [rule for ruleset in ordered for rule in ruleset.rules]


def rules_json_text(rulesets: Iterable[RuleSet]) -> str:
    rows = [_rule_row(rule) for rule in _iter_rules(rulesets)]
    return json.dumps(rows, ensure_ascii=False, indent=2) + "\n"


def rules_csv_text(rulesets: Iterable[RuleSet]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RULES_HEADER)
    for rule in _iter_rules(rulesets):
        row = _rule_row(rule)
        writer.writerow([row[column] for column in RULES_HEADER])
    return buf.getvalue()


def write_rules_json(path: str | Path, rulesets: Iterable[RuleSet]) -> None:
    Path(path).write_text(rules_json_text(rulesets), encoding="utf-8")


def write_rules_csv(path: str | Path, rulesets: Iterable[RuleSet]) -> None:
    Path(path).write_text(rules_csv_text(rulesets), encoding="utf-8", newline="")


def read_rules(path: str | Path) -> dict[str, RuleSet]:
    """Read a rules artifact (JSON array or CSV) into per-actor rule sets."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"rules artifact not found: {path}")
    text = path.read_text(encoding="utf-8")
    if text.lstrip()[:1] in ("[", "{"):
        rows = _rows_from_json(path, text)
    else:
        rows = _rows_from_csv(path, text)
    grouped: dict[str, list[AssociationRule]] = {}
    for row in rows:
        rule = AssociationRule(
            row["actor"],
            row["antecedent"],
            row["consequent"],
            RuleMetrics(
                row["pair_support"],
                row["antecedent_support"],
                row["consequent_support"],
                row["n"],
                row["confidence"],
                row["lift"],
            ),
        )
        grouped.setdefault(rule.actor, []).append(rule)
    out = {}
    for actor in sorted(grouped):
        try:
            out[actor] = RuleSet.build(actor, None, grouped[actor])
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from None
    return out


def _rows_from_json(path: Path, text: str) -> list[dict]:
    try:
        data = json.loads(text) if text.strip() else []
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise InputError(f"{path}: expected a JSON array of rules")
    rows = []
    for i, obj in enumerate(data):
        if not isinstance(obj, dict):
            raise InputError(f"{path}: rule #{i + 1} is not an object")
        rows.append(_typed_row(obj, path, f"rule #{i + 1}"))
    return rows


def _rows_from_csv(path: Path, text: str) -> list[dict]:
    reader = csv.DictReader(text.splitlines())
    if reader.fieldnames is None:
        return []
    if tuple(reader.fieldnames) != RULES_HEADER:
        raise InputError(f"{path}: expected header {','.join(RULES_HEADER)}")
    return [
        _typed_row(row, path, f"line {i + 2}") for i, row in enumerate(reader)
    ]


def _typed_row(obj: Mapping[str, object], path: Path, where: str) -> dict:
    try:
        return {
            "actor": str(obj["actor"]),
            "antecedent": str(obj["antecedent"]),
            "consequent": str(obj["consequent"]),
            "pair_support": int(obj["pair_support"]),  # type: ignore[arg-type]
            "antecedent_support": int(obj["antecedent_support"]),  # type: ignore[arg-type]
            "consequent_support": int(obj["consequent_support"]),  # type: ignore[arg-type]
            "n": int(obj["n"]),  # type: ignore[arg-type]
            "confidence": float(obj["confidence"]),  # type: ignore[arg-type]
            "lift": float(obj["lift"]),  # type: ignore[arg-type]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {where}: {exc}") from None
