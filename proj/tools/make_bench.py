#!/usr/bin/env python3
"""Generates the synthetic low-context benchmark under data/bench/.

test.conll     150 sentences: 100 of length 1-3 and 50 of length 4-5. Each
               sentence has one alias (seen only as linked text in the KB)
               and L-1 single-word entities that the gazetteer knows.
twohop.conll   20 sentences "K B": K is known and has its own page whose
               first paragraph links B; B also occurs unlinked in 12 short
               distractor pages, so sentence retrieval alone misses the link.
gazetteer.tsv  surface<TAB>TYPE for known entities and canonical titles.
kb.jsonl       pages in KB-JSONL.
"""
import argparse
import json
import random
from pathlib import Path

TYPES = ["LOC", "PER", "PROD", "GRP", "CORP", "CW"]
CONS = "कखगघचजटडतदनपबमयरलवसह"
VOWELS = ["", "ा", "ि", "ी", "ु", "े", "ो"]


class Words:
    def __init__(self, rng):
        self.rng = rng
        self.used = set()

    def fresh(self):
        while True:
            w = "".join(self.rng.choice(CONS) + self.rng.choice(VOWELS) for _ in range(3))
            if w not in self.used:
                self.used.add(w)
                return w


def paragraph(sentences, links):
    """links: (sentence_index, surface, target); surface must occur in that sentence."""
    out = []
    offset = 0
    starts = []
    for s in sentences:
        starts.append(offset)
        offset += len(s) + 1
    for si, surface, target in links:
        ws = sentences[si].split(" ")
        k = ws.index(surface)
        pos = sum(len(w) + 1 for w in ws[:k])
        s = starts[si] + pos
        out.append({"s": s, "e": s + len(surface), "t": target})
    return {"sentences": sentences, "links": out}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/bench")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    words = Words(rng)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    gazetteer = []
    pages = []
    filler = [words.fresh() for _ in range(40)]

    def prose(n):
        return [rng.choice(filler) for _ in range(n)]

    known = {t: [words.fresh() for _ in range(10)] for t in TYPES}
    for t in TYPES:
        for w in known[t]:
            gazetteer.append((w, t))

    def canonical(t):
        title = f"{words.fresh()} {words.fresh()}"
        gazetteer.append((title, t))
        pages.append({"title": title, "paragraphs": [paragraph([" ".join(prose(6))], [])]})
        return title

    # main set
    plan = [(1, 34), (2, 33), (3, 33), (4, 25), (5, 25)]
    test = []
    n = 0
    for length, count in plan:
        for i in range(count):
            t_alias = TYPES[(i + length) % 6]
            title = canonical(t_alias)
            alias = words.fresh()
            before, after = prose(3), prose(3)
            sent = " ".join(before + [alias] + after)
            pages.append({"title": f"{words.fresh()} {words.fresh()}",
                          "paragraphs": [paragraph([" ".join(prose(5)), sent], [(1, alias, title)])]})
            toks = [(alias, t_alias)]
            for j in range(length - 1):
                t = TYPES[(i * (length - 1) + j) % 6]
                toks.append((rng.choice(known[t]), t))
            rng.shuffle(toks)
            test.append((f"bench-{n:04d}", toks))
            n += 1

    # two-hop set
    twohop = []
    for i in range(20):
        t_b = TYPES[i % 6]
        t_k = TYPES[(i + 3) % 6]
        title_b = canonical(t_b)
        b = words.fresh()
        k = words.fresh()
        gazetteer.append((k, t_k))
        for _ in range(12):
            pages.append({"title": f"{words.fresh()} {words.fresh()}",
                          "paragraphs": [paragraph([f"{b} {rng.choice(filler)}"], [])]})
        sent = " ".join(prose(3) + [b] + prose(3))
        pages.append({"title": k, "paragraphs": [paragraph([sent], [(0, b, title_b)]),
                                                  paragraph([" ".join(prose(6))], [])]})
        twohop.append((f"twohop-{i:02d}", [(k, t_k), (b, t_b)]))

    rng.shuffle(pages)

    def conll(rows):
        lines = []
        for sid, toks in rows:
            lines.append(f"# id {sid}")
            lines += [f"{w} _ _ B-{t}" for w, t in toks]
            lines.append("")
        return "\n".join(lines) + "\n"

    (out / "test.conll").write_text(conll(test), encoding="utf-8")
    (out / "twohop.conll").write_text(conll(twohop), encoding="utf-8")
    (out / "gazetteer.tsv").write_text("".join(f"{s}\t{t}\n" for s, t in sorted(gazetteer)), encoding="utf-8")
    (out / "kb.jsonl").write_text("".join(json.dumps(p, ensure_ascii=False) + "\n" for p in pages), encoding="utf-8")


if __name__ == "__main__":
    main()
