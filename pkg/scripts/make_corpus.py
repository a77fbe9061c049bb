#!/usr/bin/env python3
"""Generate the bundled verification corpus, deterministically.

Writes data/corpus.txt (~205 KB) of synthetic chronicle-style prose:
glue words, coined vocabulary over a wide accented alphabet, recurring
proper names, years, and ledger identifiers. Two properties matter for
the membership study and are deliberate:

  * a wide character alphabet (~100 symbols), so the space of character
    trigrams is large relative to the corpus and a count-based trigram
    model memorizes rather than generalizes;
  * bursty reuse of coined words and names (drawn from small recency
    pools), so member snippets sit on repeated count-table entries while
    held-out snippets keep introducing unseen material.

Regenerating with the same seed reproduces the file byte for byte:

    python scripts/make_corpus.py --out data/corpus.txt
"""

from __future__ import annotations

import argparse
from collections import deque
from pathlib import Path

import numpy as np

CONSONANTS = list("bcdfghjklmnpqrstvwxz") + list("çñšžćðþ")
VOWELS = list("aeiouy") + list("áéíóúàèùâêîôûäëïöüåøæ")
GLUE = ("the of and to in a is that it was for on are as with his at be this "
        "from have or had by but what some we").split()


class CorpusWriter:
    def __init__(self, seed: int):
        self.rng = np.random.default_rng(seed)
        self.recent_words: deque[str] = deque(maxlen=80)
        self.recent_names: deque[str] = deque(maxlen=30)

    def _pick(self, pool):
        return pool[int(self.rng.integers(0, len(pool)))]

    def syllable(self) -> str:
        s = self._pick(CONSONANTS) + self._pick(VOWELS)
        if self.rng.random() < 0.55:
            s += self._pick(CONSONANTS)
        return s

    def coin(self) -> str:
        word = "".join(self.syllable() for _ in range(int(self.rng.integers(2, 4))))
        if self.rng.random() < 0.10:
            cut = int(self.rng.integers(2, max(3, len(word) - 1)))
            word = word[:cut] + "'" + word[cut:]
        return word

    def word(self) -> str:
        if self.recent_words and self.rng.random() < 0.5:
            return self._pick(self.recent_words)
        word = self.coin()
        self.recent_words.append(word)
        return word

    def name(self) -> str:
        if self.recent_names and self.rng.random() < 0.6:
            return self._pick(self.recent_names)
        name = self.coin().capitalize()
        self.recent_names.append(name)
        return name

    def ledger_id(self) -> str:
        letters = "".join(self._pick(CONSONANTS[:20])
                          for _ in range(int(self.rng.integers(1, 3)))).upper()
        return f"{letters}-{int(self.rng.integers(10, 9999))}"

    def token(self) -> str:
        roll = self.rng.random()
        if roll < 0.22:
            return self._pick(GLUE)
        if roll < 0.74:
            return self.word()
        if roll < 0.86:
            return self.name()
        if roll < 0.91:
            return str(int(self.rng.integers(1, 2100)))
        if roll < 0.95:
            return self.ledger_id()
        return self.name() + "-" + self.name()

    def sentence(self) -> str:
        n_tokens = int(self.rng.integers(6, 14))
        tokens = [self.token() for _ in range(n_tokens)]
        tokens[0] = tokens[0][:1].upper() + tokens[0][1:]
        return " ".join(tokens) + "."

    def paragraph(self) -> str:
        return " ".join(self.sentence() for _ in range(int(self.rng.integers(4, 9))))

    def corpus(self, target_chars: int) -> str:
        chunks = []
        size = 0
        while size < target_chars:
            p = self.paragraph()
            chunks.append(p)
            size += len(p) + 2
        return "\n\n".join(chunks) + "\n"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/corpus.txt")
    parser.add_argument("--seed", type=int, default=77)
    parser.add_argument("--target-chars", type=int, default=205000)
    args = parser.parse_args()

    writer = CorpusWriter(seed=args.seed)
    text = writer.corpus(target_chars=args.target_chars)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(f"wrote {len(text)} chars ({len(set(text))} distinct) to {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
