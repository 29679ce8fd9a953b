#!/usr/bin/env python3
"""Write miniature stand-ins for the six benchmark exports.

Each file carries the benchmark's exact per-class sample counts with short
placeholder sentences, so ingestion and count checks run without the
licensed data. Output is deterministic.

usage: make_benchmark_exports.py OUT_DIR
"""
import json
import random
import sys
from pathlib import Path

COUNTS = {
    ("laptop14", "train"): (994, 464, 870),
    ("laptop14", "test"): (341, 169, 128),
    ("restaurant14", "train"): (2164, 637, 807),
    ("restaurant14", "test"): (728, 196, 196),
    ("restaurant15", "train"): (912, 36, 256),
    ("restaurant15", "test"): (326, 34, 182),
}
LABELS = ("positive", "neutral", "negative")
WORDS = ["the", "screen", "battery", "food", "service", "was", "is", "very", "not", "quite", "great", "okay", "bad"]


def make_sample(rng, sample_id, domain, label):
    n = rng.randint(3, 8)
    tokens = [rng.choice(WORDS) for _ in range(n)]
    start = rng.randrange(n)
    edges = sorted((min(i, p), max(i, p)) for i in range(1, n) for p in [rng.randrange(i)])
    return {
        "id": sample_id,
        "domain": domain,
        "context_tokens": tokens,
        "target_start": start,
        "target_len": 1,
        "label": label,
        "attributes": [],
        "syntax_edges": [list(e) for e in edges],
        "precomputed": False,
    }


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    for (name, split), counts in COUNTS.items():
        rng = random.Random(f"{name}/{split}")
        domain = "laptop" if name.startswith("laptop") else "restaurant"
        labels = [lab for lab, c in zip(LABELS, counts) for _ in range(c)]
        rng.shuffle(labels)
        with open(out / f"{name}_{split}.jsonl", "w", encoding="utf-8") as f:
            for i, label in enumerate(labels):
                rec = make_sample(rng, f"{name}-{split}-{i}", domain, label)
                f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
