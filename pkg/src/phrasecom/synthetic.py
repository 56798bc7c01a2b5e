"""Deterministic synthetic corpora with known ground truth.

The planted-truth generator builds a corpus of paired documents plus
background noise where the correct common and distinct phrases are known
by construction: explicit common phrases occur in both documents of a
pair, semantic common phrases occur in only one of them but in bridge
documents that heavily share the other document's phrases, and exclusive
phrases occur in exactly one side.  Gold labels fall out of the plan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_FILLER_POOL = 48
_CONTENT_POOL = 60


def _filler_sentence(rng, n_words):
    words = rng.integers(0, _FILLER_POOL, size=n_words)
    return " ".join(f"filler{w:02d}" for w in words)


def _plant_sentence(rng, phrase):
    lead = _filler_sentence(rng, int(rng.integers(2, 5)))
    tail = _filler_sentence(rng, int(rng.integers(2, 5)))
    return f"{lead} {phrase} {tail}"


@dataclass
class PlantedTruth:
    docs: list          # {"id", "text"} dicts
    pairs: list         # (id_a, id_b)
    gold_common: dict   # pair index -> [phrase texts]
    gold_a: dict
    gold_b: dict

    def pair_id(self, k):
        a, b = self.pairs[k]
        return f"{a}|{b}"

    def gold_lines(self):
        lines = []
        for k in range(len(self.pairs)):
            pid = self.pair_id(k)
            for text in self.gold_common[k]:
                lines.append(f"{pid}\tcommon\t{text}\tperfect")
            for text in self.gold_a[k]:
                lines.append(f"{pid}\tdistinct_a\t{text}\tgood")
            for text in self.gold_b[k]:
                lines.append(f"{pid}\tdistinct_b\t{text}\tgood")
        return lines


def _phrase_bank(rng, count):
    """Distinct two-word phrases over a shared content-word pool, so the
    member words stay frequent while each pairing stays rare."""
    picked = set()
    bank = []
    while len(bank) < count:
        a, b = rng.integers(0, _CONTENT_POOL, size=2)
        if a == b or (a, b) in picked:
            continue
        picked.add((int(a), int(b)))
        bank.append(f"topic{a:02d} topic{b:02d}")
    return bank


def planted_corpus(n_pairs=30, n_background=140, seed=20240817):
    """Corpus of 2*n_pairs paired documents plus background documents.

    Per pair: three explicit common phrases planted in both documents,
    two semantic common phrases each planted in one document and in three
    bridge documents that also carry the other document's exclusive
    phrases, and three exclusive phrases per side.
    """
    rng = np.random.default_rng(seed)
    bank = _phrase_bank(rng, n_pairs * 11 + 8)
    cursor = 0

    def take(n):
        nonlocal cursor
        out = bank[cursor:cursor + n]
        cursor += n
        return out

    background = [[] for _ in range(n_background)]
    bg_order = rng.permutation(n_background)
    bg_cursor = 0

    def next_background(k):
        nonlocal bg_cursor
        out = [int(bg_order[(bg_cursor + i) % n_background]) for i in range(k)]
        bg_cursor += k
        return out

    docs = []
    pairs = []
    gold_common, gold_a, gold_b = {}, {}, {}
    for k in range(n_pairs):
        common = take(3)
        semantic_a = take(1)[0]   # occurs in a; bridges lean toward b
        semantic_b = take(1)[0]
        excl_a = take(3)
        excl_b = take(3)

        sents_a, sents_b = [], []
        for phrase in common:
            for _ in range(4):
                sents_a.append(_plant_sentence(rng, phrase))
                sents_b.append(_plant_sentence(rng, phrase))
            for bg in next_background(1):
                background[bg].append(_plant_sentence(rng, phrase))
                background[bg].append(_plant_sentence(rng, phrase))
        for phrase in excl_a:
            for _ in range(4):
                sents_a.append(_plant_sentence(rng, phrase))
        for phrase in excl_b:
            for _ in range(4):
                sents_b.append(_plant_sentence(rng, phrase))

        # semantic common phrases: planted on one side, bridged to the
        # other through background documents carrying that side's
        # exclusives
        bridges_b = next_background(3)
        for _ in range(3):
            sents_a.append(_plant_sentence(rng, semantic_a))
        for bg in bridges_b:
            for _ in range(3):
                background[bg].append(_plant_sentence(rng, semantic_a))
            for phrase in excl_b:
                for _ in range(2):
                    background[bg].append(_plant_sentence(rng, phrase))
        bridges_a = next_background(3)
        for _ in range(3):
            sents_b.append(_plant_sentence(rng, semantic_b))
        for bg in bridges_a:
            for _ in range(3):
                background[bg].append(_plant_sentence(rng, semantic_b))
            for phrase in excl_a:
                for _ in range(2):
                    background[bg].append(_plant_sentence(rng, phrase))

        for _ in range(4):
            sents_a.append(_filler_sentence(rng, int(rng.integers(6, 10))))
            sents_b.append(_filler_sentence(rng, int(rng.integers(6, 10))))

        id_a, id_b = f"pair{k:02d}a", f"pair{k:02d}b"
        docs.append({"id": id_a, "text": ". ".join(sents_a) + "."})
        docs.append({"id": id_b, "text": ". ".join(sents_b) + "."})
        pairs.append((id_a, id_b))
        gold_common[k] = common + [semantic_a, semantic_b]
        gold_a[k] = excl_a
        gold_b[k] = excl_b

    for i in range(n_background):
        for _ in range(3):
            background[i].append(_filler_sentence(rng, int(rng.integers(6, 10))))
        docs.append({"id": f"bg{i:03d}", "text": ". ".join(background[i]) + "."})

    return PlantedTruth(docs, pairs, gold_common, gold_a, gold_b)
