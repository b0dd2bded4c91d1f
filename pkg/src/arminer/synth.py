"""Deterministic synthetic corpus generator for demos and smoke tests.

Everything derives from the seed: same seed, byte-identical output.
"""

from __future__ import annotations

import random
from datetime import date, timedelta
from pathlib import Path
from typing import Sequence

from .extraction import Document, write_corpus

# (canonical name, ATT&CK-style id, aliases)
TECHNIQUE_POOL: Sequence[tuple[str, str, tuple[str, ...]]] = (
    ("Custom Cryptographic Protocol", "T1024", ("custom cryptographic protocol",)),
    ("Logon Scripts", "T1037", ("logon scripts", "logon script")),
    ("Software Packing", "T1045", ("software packing", "packed payload")),
    ("Windows Management Instrumentation", "T1047", ("wmi", "windows management instrumentation")),
    ("Process Discovery", "T1057", ("process discovery", "process listing")),
    ("Registry Run Keys / Startup Folder", "T1060", ("registry run keys", "startup folder persistence")),
    ("Rundll32", "T1085", ("rundll32",)),
    ("Modify Registry", "T1112", ("modify registry", "registry modification")),
    ("Peripheral Device Discovery", "T1120", ("peripheral device discovery",)),
    ("Data Encoding", "T1132", ("data encoding", "encoded channel")),
    ("Deobfuscate/Decode Files or Information", "T1140", ("deobfuscation routine", "decode files")),
    ("Remote Access Tools", "T1219", ("remote access tool", "remote access tools")),
)

ACTOR_POOL: Sequence[tuple[str, tuple[str, ...]]] = (
    ("CROCUTA", ("crocuta", "laughing hyena", "crocuta group")),
    ("VELVETMOTH", ("velvetmoth", "velvet moth", "moth collective")),
    ("IRONWHEEL", ("ironwheel", "iron wheel", "wheelwright crew")),
    ("SALTMARSH", ("saltmarsh", "salt marsh", "estuary team")),
    ("QUILLFISH", ("quillfish", "quill fish", "spinefish unit")),
    ("EMBERKITE", ("emberkite", "ember kite", "kitefire gang")),
)

MALWARE_POOL: Sequence[tuple[str, tuple[str, ...]]] = (
    ("Gravelgrin", ("gravelgrin", "gravel grin")),
    ("Tidepool", ("tidepool implant", "tidepool")),
    ("Mudlark", ("mudlark", "mudlark loader")),
)

CVE_POOL: Sequence[str] = ("CVE-2017-0144", "CVE-2015-1641", "CVE-2012-0158")

LOCATION_POOL: Sequence[tuple[str, tuple[str, ...]]] = (
    ("Ukraine", ("ukraine",)),
    ("France", ("france",)),
    ("Seoul", ("seoul",)),
)

_TEMPLATES = (
    "Researchers attribute the campaign to {actor}. Operators relied on {t1} and {t2}{extras}.",
    "A new report on {actor} details {t1} followed by {t2}{extras}.",
    "Incident responders tied the intrusion to {actor}; telemetry showed {t1}, then {t2}{extras}.",
)


def _write_csv(path: Path, rows: list[tuple[str, str, str, str]]) -> None:
    lines = ["canonical_name,alias,category,technique_id"]
    for row in rows:
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def generate_refbase(out_dir: Path, n_actors: int) -> None:
    actors = ACTOR_POOL[: max(1, min(n_actors, len(ACTOR_POOL)))]
    _write_csv(
        out_dir / "actors.csv",
        [(name, alias, "ThreatActor", "") for name, aliases in actors for alias in aliases],
    )
    _write_csv(
        out_dir / "techniques.csv",
        [
            (name, alias, "Technique", tid)
            for name, tid, aliases in TECHNIQUE_POOL
            for alias in aliases
        ],
    )
    _write_csv(
        out_dir / "malware.csv",
        [(name, alias, "Malware", "") for name, aliases in MALWARE_POOL for alias in aliases],
    )
    _write_csv(out_dir / "cves.csv", [(c, c.lower(), "CVE", "") for c in CVE_POOL])
    _write_csv(
        out_dir / "locations.csv",
        [(name, alias, "Location", "") for name, aliases in LOCATION_POOL for alias in aliases],
    )


def generate_corpus(out_dir: Path, seed: int, n_docs: int, n_actors: int) -> Path:
    """Write a refbase directory plus corpus.jsonl; returns the corpus path.

    Each actor gets a habitual technique clique so that mining finds
    rules; roughly one document in eight is deliberately disqualified
    (multi-actor, single-technique, or no actor).
    """
    rng = random.Random(seed)
    out_dir.mkdir(parents=True, exist_ok=True)
    generate_refbase(out_dir, n_actors)
    actors = ACTOR_POOL[: max(1, min(n_actors, len(ACTOR_POOL)))]
    cliques = {
        name: rng.sample(TECHNIQUE_POOL, k=min(5, len(TECHNIQUE_POOL)))
        for name, _ in actors
    }
    docs = []
    epoch = date(2015, 1, 1)
    for i in range(n_docs):
        doc_id = f"doc-{i:04d}"
        published = epoch + timedelta(days=rng.randrange(0, 2000))
        roll = rng.randrange(8)
        actor_name, aliases = actors[i % len(actors)]
        alias = rng.choice(aliases)
        if roll == 5 and len(actors) > 1:
            other = actors[(i + 1) % len(actors)][1][0]
            text = f"Analysts dispute whether {alias} or {other} ran the operation."
        elif roll == 6:
            only = rng.choice(cliques[actor_name])[2][0]
            text = f"A short note links {alias} to {only} with no further detail."
        elif roll == 7:
            text = "An advisory describes commodity phishing with no attribution."
        else:
            t1, t2 = rng.sample(cliques[actor_name], 2)
            extras = ""
            if rng.random() < 0.3:
                extras = f" alongside the {rng.choice(MALWARE_POOL)[1][0]} implant"
            if rng.random() < 0.2:
                extras += f" exploiting {rng.choice(CVE_POOL)}"
            text = rng.choice(_TEMPLATES).format(
                actor=alias, t1=t1[2][0], t2=t2[2][0], extras=extras
            )
        docs.append(
            Document(doc_id=doc_id, source="synth", published=published, text=text)
        )
    corpus_path = out_dir / "corpus.jsonl"
    write_corpus(corpus_path, docs)
    return corpus_path
