#!/usr/bin/env python3
"""Generate the bundled synthetic text fixture (CC0; no external sources).

Sentences are drawn from a small hand-written template grammar, so the text
has word- and character-level regularities a language model can learn, while
containing no copyrighted material. Output is deterministic for a given seed:
running this script again reproduces the committed data/ files byte for byte.

Usage: python3 tools/gen_fixture.py [out_dir]
"""

import random
import sys

NOUNS = [
    "engineer", "river", "garden", "letter", "mountain", "teacher", "child",
    "harbor", "library", "painter", "storm", "village", "doctor", "market",
    "forest", "songbird", "captain", "bridge", "orchard", "lantern", "clock",
    "valley", "miller", "rooftop", "stranger", "meadow", "sailor", "window",
]
ADJECTIVES = [
    "quiet", "bright", "old", "narrow", "green", "patient", "restless",
    "wooden", "distant", "careful", "warm", "pale", "steady", "hollow",
    "gentle", "crooked", "silver", "weathered",
]
VERBS_TRANS = [
    "watches", "carries", "follows", "remembers", "builds", "paints",
    "crosses", "gathers", "repairs", "studies", "measures", "greets",
]
VERBS_INTRANS = [
    "sleeps", "waits", "wanders", "returns", "listens", "fades", "endures",
    "arrives", "rests", "sings",
]
ADVERBS = [
    "slowly", "quietly", "often", "rarely", "again", "at last", "by morning",
    "in the rain", "before dawn", "all winter",
]
PREPOSITIONS = ["near", "beyond", "under", "beside", "along", "behind"]


def sentence(rng: random.Random) -> str:
    n = lambda: rng.choice(NOUNS)
    adj = lambda: rng.choice(ADJECTIVES)
    vt = lambda: rng.choice(VERBS_TRANS)
    vi = lambda: rng.choice(VERBS_INTRANS)
    adv = lambda: rng.choice(ADVERBS)
    prep = lambda: rng.choice(PREPOSITIONS)
    patterns = [
        lambda: f"the {adj()} {n()} {vt()} the {n()} .",
        lambda: f"the {n()} {vi()} {adv()} .",
        lambda: f"a {n()} {prep()} the {adj()} {n()} {vi()} .",
        lambda: f"when the {n()} {vi()} , the {n()} {vt()} a {adj()} {n()} .",
        lambda: f"the {n()} and the {n()} {vt()} the {n()} {prep()} the {n()} .",
        lambda: f"every {n()} {vt()} the {adj()} {n()} {adv()} .",
        lambda: f"no {n()} {vi()} {prep()} the {n()} .",
        lambda: f"the {adj()} {n()} {vi()} , and the {n()} {vt()} the {n()} .",
    ]
    return rng.choice(patterns)()


def split(rng: random.Random, min_bytes: int) -> str:
    lines = []
    size = 0
    while size < min_bytes:
        line = sentence(rng)
        lines.append(line)
        size += len(line) + 1
    return "\n".join(lines) + "\n"


def main() -> None:
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data"
    for name, seed, min_bytes in [
        ("fixture_train.txt", 1, 100_000),
        ("fixture_valid.txt", 2, 10_000),
        ("fixture_test.txt", 3, 10_000),
    ]:
        text = split(random.Random(seed), min_bytes)
        path = f"{out_dir}/{name}"
        with open(path, "w", encoding="ascii", newline="\n") as f:
            f.write(text)
        print(f"{path}: {len(text)} bytes, {text.count(chr(10))} lines")


if __name__ == "__main__":
    main()
