#!/usr/bin/env python3
"""Writes the 200-sentence stats fixture and its expected counts.

The counts are tallied here directly from the generated tags, independently
of the C++ reader.
"""
import argparse
import random
import uuid
from collections import Counter
from pathlib import Path

TYPES = ["LOC", "PER", "PROD", "GRP", "CORP", "CW"]
ORDER = [f"B-{t}" for t in TYPES] + [f"I-{t}" for t in TYPES] + ["O"]
CONS = "कखगघचछजझटठडढतथदधनपफबभमयरलवशसह"
VOWELS = ["", "ा", "ि", "ी", "ु", "ू", "े", "ै", "ो", "ौ"]


def word(rng):
    return "".join(rng.choice(CONS) + rng.choice(VOWELS) for _ in range(rng.randint(1, 3)))


def sentence(rng):
    n = rng.choice([1, 2, 2, 3, 3, 3, 4, 4, 5, 5, 6, 7, 8, 9, 10, 12, 15, 18, 22, 30])
    tags = []
    while len(tags) < n:
        if rng.random() < 0.35:
            t = rng.choice(TYPES)
            span = min(rng.randint(1, 3), n - len(tags))
            tags += [f"B-{t}"] + [f"I-{t}"] * (span - 1)
        else:
            tags.append("O")
    words = [word(rng) for _ in range(n)]
    if rng.random() < 0.3:
        words[-1] = "।"
        tags[-1] = "O"
    return words, tags


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/fixture")
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    counts = Counter()
    lengths = Counter()
    total = 0
    lines = []
    for _ in range(200):
        words, tags = sentence(rng)
        sid = uuid.UUID(int=rng.getrandbits(128))
        lines.append(f"# id {sid}\tdomain=hi")
        for w, t in zip(words, tags):
            lines.append(f"{w} _ _ {t}")
        lines.append("")
        counts.update(tags)
        lengths[len(words)] += 1
        total += len(words)
    (out / "hi_fixture.conll").write_text("\n".join(lines) + "\n", encoding="utf-8")

    kv = [f"examples\t200", f"tokens\t{total}"]
    kv += [f"label.{tag}\t{counts[tag]}" for tag in ORDER]
    kv.append("label.B-X\t0")
    kv += [f"length.{n}\t{lengths[n]}" for n in sorted(lengths)]
    (out / "expected_stats.tsv").write_text("\n".join(kv) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
