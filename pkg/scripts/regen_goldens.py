#!/usr/bin/env python3
"""Regenerate the golden pipeline outputs under tests/data/golden/.

Run from the repository root after an intentional behavior change, then
review the diff before committing:

    python3 scripts/regen_goldens.py
"""

from __future__ import annotations

import sys
from pathlib import Path

from arminer.cli import main

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"
GOLDEN = DATA / "golden"

MINE_FLAGS = ["--cs-base", "2", "--cs-fraction", "0", "--as-mult", "1", "--min-conf", "0.5"]


def run(argv: list[str]) -> None:
    code = main(argv)
    if code != 0:
        raise SystemExit(f"command failed ({code}): {' '.join(argv)}")


def regenerate() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    corpus = str(DATA / "corpus.jsonl")
    refbase = str(DATA / "refbase")
    entities = str(GOLDEN / "entities.csv")
    txns = str(GOLDEN / "transactions.jsonl")
    ds1 = str(GOLDEN / "rules_ds1.json")
    ds2 = str(GOLDEN / "rules_ds2.json")

    run(["extract", "--corpus", corpus, "--refbase", refbase, "--out", entities])
    run(["transactions", "--entitydb", entities, "--out", txns])
    run(["mine", "--transactions", txns, "--out", ds1, *MINE_FLAGS])
    run(["mine", "--transactions", txns, "--out", ds2, *MINE_FLAGS, "--min-lift", "1.0"])
    run(["profile", "--rules", ds1, "--refbase", refbase, "--top-k", "5",
         "--out", str(GOLDEN / "profile.md")])
    run(["compare", "--rules", ds1, "--out", str(GOLDEN / "compare.md")])
    run(["compare", "--rules", ds1, "--repetitive",
         "--out", str(GOLDEN / "compare_repetitive.md")])
    run(["stats", "--rules", ds2, "--out", str(GOLDEN / "stats.md")])
    print(f"goldens written to {GOLDEN}")


if __name__ == "__main__":
    sys.exit(regenerate())
