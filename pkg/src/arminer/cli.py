"""Command-line pipeline: extract -> transactions -> mine -> profile/compare/stats.

Stages communicate through files so each step is independently runnable
and testable. Every flag can also be supplied through an environment
variable named AR_<FLAG> (e.g. --min-conf -> AR_MIN_CONF); explicit flags
win over the environment.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from datetime import date
from pathlib import Path
from typing import Callable, Sequence, TypeVar

from . import extraction, miner, profiling, render, synth, transactions
from .errors import InputError, PipelineError
from .refbase import EntityCategory, load_refbase, load_reference_dir, technique_name_map
from .transactions import ItemMode

T = TypeVar("T")

_REPORT_FORMATS = ("markdown-table", "csv", "json")


def _env_key(flag: str) -> str:
    return "AR_" + flag.lstrip("-").replace("-", "_").upper()


def _env(flag: str, fallback: T, convert: Callable[[str], T]) -> T:
    raw = os.environ.get(_env_key(flag))
    if raw is None:
        return fallback
    try:
        return convert(raw)
    except (ValueError, TypeError) as exc:
        raise InputError(f"invalid value for {_env_key(flag)}: {raw!r} ({exc})") from None


def _env_flag(flag: str) -> bool:
    raw = os.environ.get(_env_key(flag))
    if raw is None:
        return False
    return raw.strip().lower() in ("1", "true", "yes", "on")


def _iso_date(raw: str) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {raw!r}") from None


def _actor_list(raw: str) -> list[str]:
    actors = [a.strip() for a in raw.split(",") if a.strip()]
    if not actors:
        raise argparse.ArgumentTypeError("expected a comma-separated actor list")
    return actors


def _opt_float(raw: str) -> float | None:
    if raw.strip().lower() in ("", "none"):
        return None
    return float(raw)


def _opt_int(raw: str) -> int | None:
    if raw.strip().lower() in ("", "none"):
        return None
    return int(raw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arminer",
        description="Mine directed technique association rules and profile threat actors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="scan a JSONL corpus into an entity CSV")
    _add_out(p)
    p.add_argument("--corpus", required=_req("--corpus"),
                   default=_env("--corpus", None, str), help="corpus JSONL path")
    _add_refbase(p, required=True)
    p.add_argument("--workers", type=int, default=_env("--workers", 1, int),
                   help="extraction worker threads (output is order-independent)")
    p.add_argument("--from", dest="date_from", type=_iso_date,
                   default=_env("--from", None, date.fromisoformat),
                   help="keep documents published on/after this date")
    p.add_argument("--to", dest="date_to", type=_iso_date,
                   default=_env("--to", None, date.fromisoformat),
                   help="keep documents published on/before this date")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("transactions", help="qualify documents into a transaction table")
    _add_out(p)
    p.add_argument("--entitydb", required=_req("--entitydb"),
                   default=_env("--entitydb", None, str), help="entity CSV path")
    p.add_argument("--mode", choices=[m.value for m in ItemMode],
                   default=_env("--mode", ItemMode.TECHNIQUE_ONLY.value, str),
                   help="item vocabulary")
    p.set_defaults(func=cmd_transactions)

    p = sub.add_parser("mine", help="mine association rules per actor")
    _add_out(p)
    p.add_argument("--transactions", required=_req("--transactions"),
                   default=_env("--transactions", None, str),
                   help="transaction JSONL path")
    p.add_argument("--format", choices=("json", "csv"),
                   default=_env("--format", "json", str), help="rule artifact format")
    p.add_argument("--cs-base", type=int, default=_env("--cs-base", 3, int),
                   help="candidate support: fixed part")
    p.add_argument("--cs-fraction", type=float, default=_env("--cs-fraction", 0.02, float),
                   help="candidate support: fraction of the actor's transactions")
    p.add_argument("--cs-absolute", type=_opt_int, default=_env("--cs-absolute", None, int),
                   help="override candidate support with an absolute count")
    p.add_argument("--as-mult", type=float, default=_env("--as-mult", 2.0, float),
                   help="antecedent support as a multiple of candidate support")
    p.add_argument("--as-absolute", type=_opt_int, default=_env("--as-absolute", None, int),
                   help="override antecedent support with an absolute count")
    p.add_argument("--min-conf", type=float, default=_env("--min-conf", 0.5, float),
                   help="minimum confidence")
    p.add_argument("--min-lift", type=_opt_float, default=_env("--min-lift", None, float),
                   help="minimum lift (omit for no lift filter)")
    _add_actors(p)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("profile", help="per-actor top rules and metric summaries")
    _add_out(p)
    _add_rules(p)
    _add_actors(p)
    _add_report_format(p)
    _add_refbase(p, required=False)
    p.add_argument("--top-k", type=int, default=_env("--top-k", 5, int),
                   help="rules per actor in the top table")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("compare", help="shared rules and similarity across actors")
    _add_out(p)
    _add_rules(p)
    _add_actors(p)
    _add_report_format(p)
    _add_refbase(p, required=False)
    p.add_argument("--repetitive", action="store_true",
                   default=_env_flag("--repetitive"),
                   help="restrict to rules held by at least two actors")
    p.add_argument("--top-shared", type=int, default=_env("--top-shared", 5, int),
                   help="entries in the most-shared table")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("stats", help="summary statistics over a rules artifact")
    _add_out(p)
    _add_rules(p)
    _add_actors(p)
    _add_report_format(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a deterministic demo dataset")
    p.add_argument("--out-dir", required=_req("--out-dir"),
                   default=_env("--out-dir", None, str))
    p.add_argument("--seed", type=int, default=_env("--seed", 0, int))
    p.add_argument("--docs", type=int, default=_env("--docs", 30, int))
    p.add_argument("--actors", type=int, default=_env("--actors", 4, int))
    p.set_defaults(func=cmd_synth)

    return parser


def _req(flag: str) -> bool:
    return os.environ.get(_env_key(flag)) is None


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=_env("--out", "-", str),
                   help="output path ('-' for stdout)")


def _add_refbase(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--refbase", required=required and _req("--refbase"),
                   default=_env("--refbase", None, str),
                   help="directory with actors/malware/techniques/locations/cves CSVs")


def _add_rules(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rules", required=_req("--rules"),
                   default=_env("--rules", None, str), help="rules artifact path")


def _add_actors(p: argparse.ArgumentParser) -> None:
    p.add_argument("--actors", type=_actor_list,
                   default=_env("--actors", None, _actor_list),
                   help="comma-separated actors (default: top 5 by rule count)")


def _add_report_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=_REPORT_FORMATS,
                   default=_env("--format", "markdown-table", str))


def _write_output(out: str, text: str) -> None:
    if text and not text.endswith("\n"):
        text += "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def cmd_extract(args: argparse.Namespace) -> int:
    bases = load_reference_dir(args.refbase)
    docs = extraction.read_corpus(args.corpus)
    docs = extraction.filter_by_date(docs, args.date_from, args.date_to)
    if args.workers < 1:
        raise InputError("--workers must be >= 1")
    db = extraction.build_entity_db(docs, bases, workers=args.workers)
    _write_output(args.out, extraction.entity_db_csv_text(db))
    return 0


def cmd_transactions(args: argparse.Namespace) -> int:
    db = extraction.read_entity_db(args.entitydb)
    mode = ItemMode.parse(args.mode)
    table = transactions.build_transaction_table(db, mode)
    _write_output(args.out, transactions.transactions_jsonl_text(table))
    return 0


def cmd_mine(args: argparse.Namespace) -> int:
    table = transactions.read_transactions(args.transactions)
    params = miner.MiningParams(
        cs_base=args.cs_base,
        cs_fraction=args.cs_fraction,
        as_multiplier=args.as_mult,
        min_confidence=args.min_conf,
        min_lift=args.min_lift,
        cs_absolute=args.cs_absolute,
        as_absolute=args.as_absolute,
    )
    rulesets = miner.mine_all(table, params, actors=args.actors)
    if args.format == "csv":
        text = miner.rules_csv_text(rulesets)
    else:
        text = miner.rules_json_text(rulesets)
    _write_output(args.out, text)
    return 0


def _load_names(refbase_dir: str | None) -> dict[str, str]:
    if refbase_dir is None:
        return {}
    techniques = Path(refbase_dir) / "techniques.csv"
    return technique_name_map(load_refbase(techniques, EntityCategory.TECHNIQUE))


def _select(rulesets, requested):
    if requested is not None:
        return {
            actor: rulesets.get(actor, miner.RuleSet(actor)) for actor in requested
        }
    return {actor: rulesets[actor] for actor in profiling.select_actors(rulesets, 5)}


def cmd_profile(args: argparse.Namespace) -> int:
    rulesets = miner.read_rules(args.rules)
    if args.top_k < 0:
        raise InputError("--top-k must be >= 0")
    names = _load_names(args.refbase)
    selected = _select(rulesets, args.actors)
    profiles = [
        profiling.build_actor_profile(ruleset, args.top_k)
        for ruleset in selected.values()
    ]
    config = render.RenderConfig(format=args.format)
    if args.format == "json":
        text = json.dumps(
            [render.profile_as_dict(p) for p in profiles], ensure_ascii=False, indent=2
        )
    elif args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("actor", "id", "antecedent", "consequent",
                         "support", "confidence", "lift"))
        for profile in profiles:
            table = render.render_rule_table(
                profile.top_rules, render.RenderConfig(format="csv"), names
            )
            for line in table.splitlines()[1:]:
                writer.writerow([profile.actor] + next(csv.reader([line])))
        text = buf.getvalue().rstrip("\n")
    else:
        parts = [f"# Actor profiles (top {args.top_k} rules by lift)", ""]
        for profile in profiles:
            parts += [render.render_profile(profile, config, names), ""]
        text = "\n".join(parts).rstrip("\n")
    _write_output(args.out, text)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    rulesets = miner.read_rules(args.rules)
    selected = _select(rulesets, args.actors)
    if len(selected) < 2:
        raise InputError("compare needs at least two actors")
    if args.repetitive:
        selected = profiling.repetitive_subset(selected)
    shared = profiling.shared_rules(selected)
    matrix = profiling.similarity_matrix(selected)
    names = _load_names(args.refbase)
    config = render.RenderConfig(format=args.format)
    if args.format == "json":
        text = json.dumps(
            {
                "repetitive_only": args.repetitive,
                "rule_counts": {a: len(rs) for a, rs in selected.items()},
                "shared_rules": json.loads(
                    render.render_shared_rules(shared[: args.top_shared],
                                               render.RenderConfig(format="json"))
                ),
                "similarity": render.similarity_as_dict(matrix),
                "note": "identical empty rule sets score 1.0 by convention",
            },
            ensure_ascii=False,
            indent=2,
        )
    elif args.format == "csv":
        blocks = []
        for name, grid in (
            ("jaccard", matrix.jaccard),
            ("overlap_dice", matrix.overlap_dice),
            ("dice_standard", matrix.dice_standard),
        ):
            blocks.append(f"# {name}")
            blocks.append(
                render.render_similarity_matrix(matrix.actors, grid,
                                                render.RenderConfig(format="csv"))
            )
        text = "\n".join(blocks)
    else:
        scope = "repetitive rules (held by >= 2 actors)" if args.repetitive else "all rules"
        total = sum(len(rs) for rs in selected.values())
        unique = len(shared)
        lines = [f"# Rule-set comparison — {scope}", ""]
        lines.append("## Rule counts")
        lines.append("")
        for actor, ruleset in selected.items():
            lines.append(f"- {actor}: {len(ruleset)}")
        lines.append(f"- TOTAL: {total} ({unique} unique associations)")
        lines += ["", f"## Most shared associations (top {args.top_shared})", "",
                  render.render_shared_rules(shared[: args.top_shared], config, names)]
        for title, grid in (
            ("Jaccard (intersection / union)", matrix.jaccard),
            ("Overlap (intersection / smaller set; reported by some vendors as Sorensen-Dice)",
             matrix.overlap_dice),
            ("Dice (2 x intersection / size sum)", matrix.dice_standard),
        ):
            lines += ["", f"## Similarity: {title}", "",
                      render.render_similarity_matrix(matrix.actors, grid, config)]
        lines += ["", "Note: identical empty rule sets score 1.0 by convention."]
        text = "\n".join(lines)
    _write_output(args.out, text)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    rulesets = miner.read_rules(args.rules)
    if args.actors is not None:
        rulesets = {a: rulesets.get(a, miner.RuleSet(a)) for a in args.actors}
    rules = [rule for ruleset in rulesets.values() for rule in ruleset.rules]
    config = render.RenderConfig(format=args.format)
    if not rules:
        _write_output(args.out, "no rules in scope" if args.format == "markdown-table"
                      else ("{}" if args.format == "json" else "Measure"))
        return 0
    columns = {
        "support": profiling.summary_stats([r.metrics.pair_support for r in rules]),
        "confidence": profiling.summary_stats(
            [r.metrics.confidence * 100 for r in rules]
        ),
        "lift": profiling.summary_stats([r.metrics.lift for r in rules]),
    }
    _write_output(args.out, render.render_stats_table(columns, config))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    if args.docs < 1 or args.actors < 1:
        raise InputError("--docs and --actors must be >= 1")
    corpus = synth.generate_corpus(Path(args.out_dir), args.seed, args.docs, args.actors)
    sys.stdout.write(f"wrote {corpus}\n")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except (PipelineError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
