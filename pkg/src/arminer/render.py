"""Report rendering: rule tables, stat summaries, similarity matrices.

Confidence is displayed as a percentage truncated toward zero (2/3 shows
as 66), computed from the integer supports so float representation can
never skew the cut. Lift is rounded half-up. Machine formats always use
'.' as the decimal separator.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

from .miner import AssociationRule
from .profiling import ActorProfile, SharedRuleEntry, SimilarityMatrix, SummaryStats

FORMATS = ("markdown-table", "csv", "json")
CONFIDENCE_DISPLAYS = ("truncated-percent", "percent-2dp")

RULE_TABLE_COLUMNS = (
    "ID",
    "Antecedent Technique",
    "Consequent Technique",
    "Support",
    "Confidence",
    "Lift",
)
STATS_ROWS = (
    ("min", "Minimal value"),
    ("max", "Maximal value"),
    ("mean", "Mean"),
    ("median", "Median"),
    ("mode", "Mode"),
    ("stddev", "Standard deviation"),
    ("iqr", "Interquartile range (IQR)"),
)

_BARE_TECHNIQUE = re.compile(r"^T\d{4}$")
_TAGGED_TECHNIQUE = re.compile(r"^Technique:(T\d{4})$")


@dataclass
class RenderConfig:
    format: str = "markdown-table"
    confidence_display: str = "truncated-percent"
    lift_decimals: int | None = None  # None: 2 in rule tables, 3 in stats

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise ValueError(f"format must be one of {', '.join(FORMATS)}")
        if self.confidence_display not in CONFIDENCE_DISPLAYS:
            raise ValueError(
                f"confidence_display must be one of {', '.join(CONFIDENCE_DISPLAYS)}"
            )
        if self.lift_decimals is not None and not 0 <= self.lift_decimals <= 6:
            raise ValueError("lift_decimals must be within [0, 6]")


def format_confidence(rule: AssociationRule, config: RenderConfig) -> str:
    m = rule.metrics
    if config.confidence_display == "percent-2dp":
        return f"{m.confidence * 100:.2f}"
    if m.antecedent_support > 0:
        return str((100 * m.pair_support) // m.antecedent_support)
    return str(int(m.confidence * 100))


def round_half_up(value: float, decimals: int) -> str:
    quantum = Decimal(1).scaleb(-decimals) if decimals else Decimal(1)
    return str(Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP))


def display_item(item: str, names: Mapping[str, str] | None) -> str:
    """Render `Name (Txxxx)` when a technique name is known, else the item."""
    match = _BARE_TECHNIQUE.match(item) or _TAGGED_TECHNIQUE.match(item)
    if match:
        tid = match.group(1) if match.lastindex else match.group(0)
        if names and tid in names:
            return f"{names[tid]} ({tid})"
        return tid
    return item


def _rule_cells(
    rules: Sequence[AssociationRule],
    config: RenderConfig,
    names: Mapping[str, str] | None,
) -> list[list[str]]:
    decimals = config.lift_decimals if config.lift_decimals is not None else 2
    return [
        [
            str(i),
            display_item(rule.antecedent, names),
            display_item(rule.consequent, names),
            str(rule.metrics.pair_support),
            format_confidence(rule, config),
            round_half_up(rule.metrics.lift, decimals),
        ]
        for i, rule in enumerate(rules, start=1)
    ]


def render_rule_table(
    rules: Sequence[AssociationRule],
    config: RenderConfig | None = None,
    names: Mapping[str, str] | None = None,
) -> str:
    config = config or RenderConfig()
    cells = _rule_cells(rules, config, names)
    if config.format == "csv":
        return _csv_text([list(RULE_TABLE_COLUMNS)] + cells)
    if config.format == "json":
        keys = ("id", "antecedent", "consequent", "support", "confidence", "lift")
        return _json_text([dict(zip(keys, row)) for row in cells])
    return _markdown_table(RULE_TABLE_COLUMNS, cells)


def _fmt_stat(value: float, decimals: int) -> str:
    if value == int(value):
        return str(int(value))
    return round_half_up(value, decimals)


def render_stats_table(
    columns: Mapping[str, SummaryStats], config: RenderConfig | None = None
) -> str:
    """One row per measure, one column per metric (Table-2 layout)."""
    config = config or RenderConfig()
    decimals = config.lift_decimals if config.lift_decimals is not None else 3
    header = ["Measure"] + [_title(name) for name in columns]
    rows = []
    for attr, label in STATS_ROWS:
        row = [label]
        for stats in columns.values():
            row.append(_fmt_stat(getattr(stats, attr), decimals))
        rows.append(row)
    if config.format == "csv":
        return _csv_text([header] + rows)
    if config.format == "json":
        return _json_text(
            {
                name: {attr: getattr(stats, attr) for attr, _ in STATS_ROWS}
                for name, stats in columns.items()
            }
        )
    return _markdown_table(header, rows)


def _title(name: str) -> str:
    return name.replace("_", " ").title()


def render_similarity_matrix(
    actors: Sequence[str],
    matrix: Sequence[Sequence[float]],
    config: RenderConfig | None = None,
) -> str:
    config = config or RenderConfig()
    if config.format == "csv":
        rows = [[""] + list(actors)]
        for actor, row in zip(actors, matrix):
            rows.append([actor] + [repr(v) for v in row])
        return _csv_text(rows)
    if config.format == "json":
        return _json_text({"actors": list(actors), "matrix": [list(r) for r in matrix]})
    header = [""] + list(actors)
    body = [
        [actor] + [round_half_up(v, 3) for v in row]
        for actor, row in zip(actors, matrix)
    ]
    return _markdown_table(header, body)


def render_shared_rules(
    entries: Sequence[SharedRuleEntry],
    config: RenderConfig | None = None,
    names: Mapping[str, str] | None = None,
) -> str:
    config = config or RenderConfig()
    header = ("Association", "Count", "Threat Actors")
    rows = [
        [
            f"{display_item(e.antecedent, names)} -> {display_item(e.consequent, names)}",
            str(e.count),
            ", ".join(sorted(e.actors)),
        ]
        for e in entries
    ]
    if config.format == "csv":
        return _csv_text([list(header)] + rows)
    if config.format == "json":
        return _json_text(
            [
                {
                    "antecedent": e.antecedent,
                    "consequent": e.consequent,
                    "count": e.count,
                    "actors": sorted(e.actors),
                }
                for e in entries
            ]
        )
    return _markdown_table(header, rows)


def render_profile(
    profile: ActorProfile,
    config: RenderConfig | None = None,
    names: Mapping[str, str] | None = None,
) -> str:
    config = config or RenderConfig()
    k = len(profile.top_rules)
    lines = [
        f"## {profile.actor} — {profile.rule_count} rules",
        "",
        f"### Top {k} associations by lift",
        "",
        render_rule_table(profile.top_rules, _with_format(config, config.format), names),
    ]
    if profile.stats:
        stats_config = RenderConfig(config.format, config.confidence_display, None)
        lines += ["", "### Metric summary (confidence in percent)", "",
                  render_stats_table(profile.stats, stats_config)]
    return "\n".join(lines)


def _with_format(config: RenderConfig, fmt: str) -> RenderConfig:
    return RenderConfig(fmt, config.confidence_display, config.lift_decimals)


def profile_as_dict(profile: ActorProfile) -> dict:
    return {
        "actor": profile.actor,
        "rule_count": profile.rule_count,
        "stats": {
            name: {attr: getattr(stats, attr) for attr, _ in STATS_ROWS}
            for name, stats in profile.stats.items()
        },
        "top_rules": [
            {
                "antecedent": r.antecedent,
                "consequent": r.consequent,
                "pair_support": r.metrics.pair_support,
                "antecedent_support": r.metrics.antecedent_support,
                "consequent_support": r.metrics.consequent_support,
                "n": r.metrics.n,
                "confidence": r.metrics.confidence,
                "lift": r.metrics.lift,
            }
            for r in profile.top_rules
        ],
    }


def similarity_as_dict(matrix: SimilarityMatrix) -> dict:
    return {
        "actors": matrix.actors,
        "jaccard": matrix.jaccard,
        "overlap_dice": matrix.overlap_dice,
        "dice_standard": matrix.dice_standard,
    }


def _markdown_table(header: Iterable[str], rows: Sequence[Sequence[str]]) -> str:
    head = list(header)
    lines = [
        "| " + " | ".join(head) + " |",
        "|" + "|".join(" --- " for _ in head) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines)


def _csv_text(rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _json_text(obj: object) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2)
