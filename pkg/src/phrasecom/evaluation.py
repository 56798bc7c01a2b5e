"""Gold-label evaluation: precision/recall/F1 over common and distinct
sets, macro-averaged over document pairs, plus stratified pair sampling
by TF-IDF cosine.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

POSITIVE_LABELS = ("perfect", "good")
ALL_LABELS = ("perfect", "good", "fair", "bad")


def prf(system, gold):
    """Precision, recall, F1 of a system set against a gold set.

    An empty system set scores (0, 0, 0); an empty gold set is an error
    because recall is undefined.
    """
    gold = set(gold)
    if not gold:
        raise ValueError("empty gold set: recall undefined")
    system = set(system)
    if not system:
        return 0.0, 0.0, 0.0
    hit = len(system & gold)
    p = hit / len(system)
    r = hit / len(gold)
    f1 = 2 * p * r / (p + r) if (p + r) > 0 else 0.0
    return p, r, f1


@dataclass
class GoldLabels:
    """Accepted terms per pair and role, already filtered to positives."""
    common: dict        # pair_id -> set of phrase texts
    distinct_a: dict
    distinct_b: dict


def read_gold(path, perfect_only=False):
    """Read gold labels from tab-separated lines:
    ``pair_id<TAB>role<TAB>phrase<TAB>label``.

    Positive labels are perfect and good; ``perfect_only`` narrows the
    positives to perfect.
    """
    positives = ("perfect",) if perfect_only else POSITIVE_LABELS
    roles = {"common": {}, "distinct_a": {}, "distinct_b": {}}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}: line {lineno}: expected 4 tab-separated fields")
            pair_id, role, phrase, label = parts
            if role not in roles:
                raise ValueError(f"{path}: line {lineno}: unknown role {role!r}")
            if label not in ALL_LABELS:
                raise ValueError(f"{path}: line {lineno}: unknown label {label!r}")
            bucket = roles[role].setdefault(pair_id, set())
            if label in positives:
                bucket.add(phrase)
    return GoldLabels(roles["common"], roles["distinct_a"], roles["distinct_b"])


def _result_sets(result):
    common = {t for t, _ in result.common}
    qa = {t for t, _ in result.distinct_a}
    qb = {t for t, _ in result.distinct_b}
    return common, qa, qb


def evaluate_pairs(results, gold, pair_ids=None):
    """Macro-averaged P/R/F1 for the common and distinct roles.

    ``results`` maps pair_id to a ComparisonResult (or is a list zipped
    with ``pair_ids``).  Every pair must have gold labels; a role whose
    positive gold set is empty is skipped for that pair and noted in the
    per-pair breakdown.
    """
    if pair_ids is not None:
        results = dict(zip(pair_ids, results))
    per_pair = {}
    agg = {"common": [], "distinct": []}
    known = set(gold.common) | set(gold.distinct_a) | set(gold.distinct_b)
    for pair_id, result in results.items():
        if pair_id not in known:
            raise ValueError(f"no gold labels for pair {pair_id!r}")
        sys_c, sys_a, sys_b = _result_sets(result)
        entry = {}
        gc = gold.common.get(pair_id, set())
        if gc:
            entry["common"] = prf(sys_c, gc)
            agg["common"].append(entry["common"])
        else:
            entry["common"] = None
        for role, sys_set, bucket in (("distinct_a", sys_a, gold.distinct_a),
                                      ("distinct_b", sys_b, gold.distinct_b)):
            gd = bucket.get(pair_id, set())
            if gd:
                entry[role] = prf(sys_set, gd)
                agg["distinct"].append(entry[role])
            else:
                entry[role] = None
        per_pair[pair_id] = entry

    def macro(rows):
        if not rows:
            return (0.0, 0.0, 0.0)
        arr = np.asarray(rows)
        return tuple(arr.mean(axis=0))

    return {
        "common": macro(agg["common"]),
        "distinct": macro(agg["distinct"]),
        "pairs": per_pair,
        "n_pairs": len(results),
    }


def report_table(reports):
    """Aligned-column text table: one row per (method, role)."""
    lines = [f"{'method':<14} {'role':<10} {'P':>8} {'R':>8} {'F1':>8}"]
    for method in sorted(reports):
        for role in ("common", "distinct"):
            p, r, f1 = reports[method][role]
            lines.append(f"{method:<14} {role:<10} {p:>8.4f} {r:>8.4f} {f1:>8.4f}")
    return "\n".join(lines)


def _tfidf_matrix(index):
    vocab = {}
    df = Counter()
    for lemmas in index.lemmas:
        df.update(set(lemmas))
    for w in sorted(df):
        vocab[w] = len(vocab)
    n = index.n_docs
    mat = np.zeros((n, len(vocab)))
    for j, lemmas in enumerate(index.lemmas):
        for w, c in Counter(lemmas).items():
            mat[j, vocab[w]] = c * math.log(n / df[w])
    norms = np.linalg.norm(mat, axis=1)
    norms[norms == 0] = 1.0
    return mat / norms[:, None]


def document_cosines(index):
    """TF-IDF cosine for every unordered document pair."""
    mat = _tfidf_matrix(index)
    sims = mat @ mat.T
    out = {}
    n = index.n_docs
    for a in range(n):
        for b in range(a + 1, n):
            out[(index.doc_ids[a], index.doc_ids[b])] = float(sims[a, b])
    return out


def sample_pairs(index, n_high, n_low, n_random, high_cut=0.6,
                 low_band=(0.05, 0.2), seed=42):
    """Stratified document-pair sample by TF-IDF cosine.

    Draws ``n_high`` pairs with cosine > high_cut, ``n_low`` pairs inside
    the low band, and ``n_random`` pairs from the rest of the pool, all
    without replacement under a fixed seed.  Short strata return every
    available pair and are flagged in the report.
    """
    if index.n_docs < 2:
        raise ValueError("need at least two documents to sample pairs")
    cosines = document_cosines(index)
    all_pairs = sorted(cosines)
    high = [p for p in all_pairs if cosines[p] > high_cut]
    low = [p for p in all_pairs if low_band[0] < cosines[p] < low_band[1]]
    rng = np.random.default_rng(seed)

    def draw(pool, want, taken):
        pool = [p for p in pool if p not in taken]
        if want >= len(pool):
            return list(pool), len(pool) < want
        idx = rng.choice(len(pool), size=want, replace=False)
        return [pool[i] for i in sorted(idx)], False

    taken = set()
    sample_high, short_high = draw(high, n_high, taken)
    taken.update(sample_high)
    sample_low, short_low = draw(low, n_low, taken)
    taken.update(sample_low)
    sample_rand, short_rand = draw(all_pairs, n_random, taken)
    return {
        "high": sample_high,
        "low": sample_low,
        "random": sample_rand,
        "shortfall": {"high": short_high, "low": short_low, "random": short_rand},
    }
