"""Salient phrase selection per document.

Interestingness scores single phrases by squared normalized term
frequency times inverse document frequency, and phrase pairs by
intra-document pointwise mutual information discounted by document
frequency.  A greedy trade-off between interestingness and string
diversity then picks up to K phrases per document.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_lev_cache = {}


def interestingness_raw(tf, max_tf, n_docs, df):
    """Single-phrase interestingness: (0.5 + 0.5*tf/max_tf)^2 * ln(n/df)."""
    return (0.5 + 0.5 * tf / max_tf) ** 2 * math.log(n_docs / df)


def pair_interestingness_raw(tf_pair, tf_a, tf_b, doc_total, n_docs, df_pair):
    """Phrase-pair interestingness: intra-document PMI times ln(n/df)."""
    if tf_a <= 0 or tf_b <= 0:
        raise ValueError("phrase pair member with zero count")
    pmi = (tf_pair / doc_total) / ((tf_a / doc_total) * (tf_b / doc_total))
    return pmi * math.log(n_docs / df_pair)


def interestingness(index, doc_id, phrase_text):
    """Interestingness of a phrase in a document, from index statistics."""
    j = index.doc_index(doc_id)
    pid = index.phrase_id(phrase_text)
    return _score_one(index, j, pid)


def _score_one(index, j, pid):
    cnt = index.counts[j]
    phrase = index.phrases[pid]
    n_docs = index.n_docs
    df = phrase.doc_frequency
    if phrase.kind == "single":
        max_tf = max(cnt.values())
        return interestingness_raw(cnt.get(pid, 0), max_tf, n_docs, df)
    a = index.phrase_pos.get(("s", phrase.members[0]), -1)
    b = index.phrase_pos.get(("s", phrase.members[1]), -1)
    tf_a = cnt.get(a, 0) if a >= 0 else 0
    tf_b = cnt.get(b, 0) if b >= 0 else 0
    return pair_interestingness_raw(cnt.get(pid, 0), tf_a, tf_b,
                                    index.doc_len[j], n_docs, df)


def normalize_interestingness(raw, eps=1e-6):
    """Min-max rescale per-document scores into (0, 1).

    All-equal inputs map to 0.5; otherwise scores land in [eps, 1-eps]
    preserving order.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        return raw
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        return np.full_like(raw, 0.5)
    return eps + (1.0 - 2.0 * eps) * (raw - lo) / (hi - lo)


def levenshtein_similarity(a, b):
    """Character-level edit similarity: 1 - dist(a, b) / max(|a|, |b|)."""
    if a == b:
        return 1.0
    key = (a, b) if a <= b else (b, a)
    hit = _lev_cache.get(key)
    if hit is not None:
        return hit
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        ca = a[i - 1]
        for j in range(1, lb + 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != b[j - 1]))
        prev = cur
    sim = 1.0 - prev[lb] / max(la, lb)
    if len(_lev_cache) < 200000:
        _lev_cache[key] = sim
    return sim


def similarity_matrix(texts):
    n = len(texts)
    M = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            M[i, j] = M[j, i] = levenshtein_similarity(texts[i], texts[j])
    return M


def select_salient(r, M, k, mu, return_stats=False):
    """Greedy maximization of mu * sum(q_a r_a) - sum(r_a M_ab r_b) over
    the selected set, with q = M r over the full candidate list.

    Adds the candidate with the largest marginal gain each step, stopping
    at k selections or when no candidate has positive gain.  Ties break
    toward higher r, then lower index.  Returns selected indices in
    selection order (and an operation-count dict when requested).
    """
    r = np.asarray(r, dtype=float)
    n = r.size
    stats = {"pairwise_ops": n * n, "scan_ops": 0}
    if n == 0:
        return ([], stats) if return_stats else []
    q = M @ r
    base = mu * q * r - r * r
    penalty = np.zeros(n)
    taken = np.zeros(n, dtype=bool)
    picked = []
    for _ in range(min(k, n)):
        gains = base - penalty
        gains[taken] = -np.inf
        stats["scan_ops"] += n
        best_gain = gains.max()
        if best_gain <= 0.0:
            break
        tied = np.flatnonzero(gains == best_gain)
        if tied.size > 1:
            tied = tied[r[tied] == r[tied].max()]
        choice = int(tied[0])
        picked.append(choice)
        taken[choice] = True
        penalty += 2.0 * r * M[:, choice] * r[choice]
        stats["scan_ops"] += n
    return (picked, stats) if return_stats else picked


def selection_objective(r, M, subset, mu):
    """Objective value of a selected subset (used by demos and tests)."""
    r = np.asarray(r, dtype=float)
    idx = list(subset)
    if not idx:
        return 0.0
    q = M @ r
    head = mu * float(np.sum(q[idx] * r[idx]))
    sub = M[np.ix_(idx, idx)]
    tail = float(r[idx] @ sub @ r[idx])
    return head - tail


@dataclass
class SalientPhraseSet:
    doc_id: str
    pids: list          # selection order after pair-member removal
    scores: dict        # pid -> normalized interestingness

    def texts(self, index):
        return [index.phrases[p].text for p in self.pids]


def document_candidates(index, j):
    """Vocabulary phrases occurring in document j, sorted by id."""
    return sorted(index.counts[j])


def salient_phrases(index, doc_id, k=30, mu=3.0, eps=1e-6):
    """Salient phrase set for one document.

    Scores all vocabulary phrases of the document, normalizes phrases and
    pairs jointly, greedily selects up to K under the diversity penalty,
    and removes the member phrases of any selected phrase pair.
    Results are cached on the index per (doc, k, mu).
    """
    j = index.doc_index(doc_id)
    cache_key = (j, k, mu)
    hit = index._salient_cache.get(cache_key)
    if hit is not None:
        return hit

    pids = document_candidates(index, j)
    if not pids:
        result = SalientPhraseSet(doc_id, [], {})
        index._salient_cache[cache_key] = result
        return result
    raw = [_score_one(index, j, pid) for pid in pids]
    norm = normalize_interestingness(raw, eps)
    texts = [index.phrases[p].text for p in pids]
    M = similarity_matrix(texts)
    picked = select_salient(norm, M, k, mu)

    selected = [pids[i] for i in picked]
    members = set()
    for pid in selected:
        ph = index.phrases[pid]
        if ph.kind == "pair":
            for part in ph.members:
                mp = index.phrase_pos.get(("s", part))
                if mp is not None:
                    members.add(mp)
    final = [pid for pid in selected if pid not in members]
    scores = {pids[i]: float(norm[i]) for i in picked if pids[i] in set(final)}
    result = SalientPhraseSet(doc_id, final, scores)
    index._salient_cache[cache_key] = result
    return result
