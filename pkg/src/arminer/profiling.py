"""Actor profiles, cross-actor shared rules, and set-similarity matrices."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import AbstractSet, Mapping, Sequence

from .miner import AssociationRule, RuleSet


@dataclass(frozen=True)
class SummaryStats:
    min: float
    max: float
    mean: float
    median: float
    mode: float
    stddev: float
    iqr: float


def summary_stats(values: Sequence[float]) -> SummaryStats:
    """Descriptive statistics over one metric column.

    median: midpoint (mean of the middle two for even n). mode: most
    frequent value after rounding to 3 decimals, smallest on ties. stddev:
    population (divide by n). iqr: Tukey median-of-halves, excluding the
    overall median for odd n.
    """
    if not values:
        raise ValueError("summary_stats requires at least one value")
    ordered = sorted(float(v) for v in values)
    n = len(ordered)
    mean = math.fsum(ordered) / n
    if n == 1:
        q1 = q3 = ordered[0]
    else:
        q1 = _median(ordered[: n // 2])
        q3 = _median(ordered[(n + 1) // 2 :])
    counts = Counter(round(v, 3) for v in ordered)
    top = max(counts.values())
    mode = min(v for v, c in counts.items() if c == top)
    variance = math.fsum((x - mean) ** 2 for x in ordered) / n
    return SummaryStats(
        min=ordered[0],
        max=ordered[-1],
        mean=mean,
        median=_median(ordered),
        mode=mode,
        stddev=math.sqrt(variance),
        iqr=q3 - q1,
    )


def _median(ordered: Sequence[float]) -> float:
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


@dataclass
class ActorProfile:
    actor: str
    rule_count: int
    stats: dict[str, SummaryStats]  # keys: support, confidence, lift
    top_rules: list[AssociationRule]


def top_k_rules(ruleset: RuleSet, k: int) -> list[AssociationRule]:
    """First k rules in canonical order (highest lift first)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return ruleset.rules[:k]


def build_actor_profile(ruleset: RuleSet, top_k: int = 5) -> ActorProfile:
    """Profile one actor. Confidence statistics are in percent."""
    stats: dict[str, SummaryStats] = {}
    if ruleset.rules:
        stats = {
            "support": summary_stats([r.metrics.pair_support for r in ruleset.rules]),
            "confidence": summary_stats(
                [r.metrics.confidence * 100 for r in ruleset.rules]
            ),
            "lift": summary_stats([r.metrics.lift for r in ruleset.rules]),
        }
    return ActorProfile(ruleset.actor, len(ruleset.rules), stats, top_k_rules(ruleset, top_k))


def select_actors(rulesets: Mapping[str, RuleSet], top_n: int = 5) -> list[str]:
    """Actors with the most rules; ties go to the smaller name."""
    ranked = sorted(rulesets, key=lambda a: (-len(rulesets[a]), a))
    return ranked[:top_n]


def rule_pair_set(ruleset: RuleSet) -> set[tuple[str, str]]:
    return {rule.pair for rule in ruleset.rules}


@dataclass(frozen=True)
class SharedRuleEntry:
    antecedent: str
    consequent: str
    count: int
    actors: frozenset[str]


def shared_rules(rulesets: Mapping[str, RuleSet]) -> list[SharedRuleEntry]:
    """How many actors hold each distinct ordered pair.

    Sorted by count descending, then by the pair IDs ascending.
    """
    if not rulesets:
        raise ValueError("shared_rules requires at least one rule set")
    holders: dict[tuple[str, str], set[str]] = {}
    for actor, ruleset in rulesets.items():
        for pair in rule_pair_set(ruleset):
            holders.setdefault(pair, set()).add(actor)
    entries = [
        SharedRuleEntry(pair[0], pair[1], len(actors), frozenset(actors))
        for pair, actors in holders.items()
    ]
    entries.sort(key=lambda e: (-e.count, e.antecedent, e.consequent))
    return entries


def repetitive_subset(rulesets: Mapping[str, RuleSet]) -> dict[str, RuleSet]:
    """Restrict each actor to rules held by at least two distinct actors."""
    if len(rulesets) < 2:
        raise ValueError("repetitive_subset requires at least two rule sets")
    counts: Counter[tuple[str, str]] = Counter()
    for ruleset in rulesets.values():
        counts.update(rule_pair_set(ruleset))
    restricted = {}
    for actor, ruleset in rulesets.items():
        kept = [rule for rule in ruleset.rules if counts[rule.pair] >= 2]
        restricted[actor] = RuleSet.build(actor, ruleset.params, kept)
    return restricted


def jaccard(a: AbstractSet, b: AbstractSet) -> float:
    """|a n b| / |a u b|; 1.0 when both sets are empty."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def overlap_dice(a: AbstractSet, b: AbstractSet) -> float:
    """Intersection over the smaller set (the overlap coefficient).

    Some reports label this formula Sorensen-Dice; dice_standard provides
    the textbook Dice. Both-empty scores 1.0, one-empty scores 0.0.
    """
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    return len(a & b) / min(len(a), len(b))


def dice_standard(a: AbstractSet, b: AbstractSet) -> float:
    """2 |a n b| / (|a| + |b|); 1.0 when both sets are empty."""
    if not a and not b:
        return 1.0
    return 2 * len(a & b) / (len(a) + len(b))


@dataclass
class SimilarityMatrix:
    actors: list[str]
    jaccard: list[list[float]]
    overlap_dice: list[list[float]]
    dice_standard: list[list[float]]


def similarity_matrix(rulesets: Mapping[str, RuleSet]) -> SimilarityMatrix:
    """All three coefficients over the actors' ordered rule-pair sets.

    Actor order follows the mapping order, so callers control the layout.
    """
    if len(rulesets) < 2:
        raise ValueError("similarity_matrix requires at least two actors")
    actors = list(rulesets)
    pair_sets = [rule_pair_set(rulesets[a]) for a in actors]
    matrices = {name: [] for name in ("jaccard", "overlap_dice", "dice_standard")}
    coefficients = {
        "jaccard": jaccard,
        "overlap_dice": overlap_dice,
        "dice_standard": dice_standard,
    }
    for name, fn in coefficients.items():
        matrices[name] = [
            [fn(row_set, col_set) for col_set in pair_sets] for row_set in pair_sets
        ]
    return SimilarityMatrix(
        actors, matrices["jaccard"], matrices["overlap_dice"], matrices["dice_standard"]
    )
