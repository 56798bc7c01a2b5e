"""Reference comparison methods sharing the corpus and graph machinery.

word_match works on single words with TF-IDF; string_fuzzy and
context_fuzzy threshold a per-document relevance signal; the three
solver variants strip one ingredient each from the full method (no
graph, no joint loop, or the sum/difference measures).
"""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from . import salience, solver
from .measures import commonality_vec, distinction_vec
from .solver import ComparisonResult, PropagationProblem, supervision_vector


def _lemma_df(index):
    df = Counter()
    for lemmas in index.lemmas:
        df.update(set(lemmas))
    return df


def word_match(index, id_a, id_b, top_k=20):
    """Top-k TF-IDF words per document; the intersection is common, the
    remainders are the two distinct sets."""
    ja, jb = index.doc_index(id_a), index.doc_index(id_b)
    df = _lemma_df(index)
    n = index.n_docs

    def top_words(j):
        tf = Counter(index.lemmas[j])
        scored = {w: c * math.log(n / df[w]) for w, c in tf.items()}
        ranked = sorted(scored, key=lambda w: (-scored[w], w))[:top_k]
        return ranked, scored

    words_a, scores_a = top_words(ja)
    words_b, scores_b = top_words(jb)
    common_words = sorted(set(words_a) & set(words_b),
                          key=lambda w: (-min(scores_a[w], scores_b[w]), w))
    common = [(w, min(scores_a[w], scores_b[w])) for w in common_words]
    rest_a = [(w, scores_a[w]) for w in words_a if w not in set(common_words)]
    rest_b = [(w, scores_b[w]) for w in words_b if w not in set(common_words)]
    trace = {"outer_iters": 0, "inner_iters": 0}
    return ComparisonResult((id_a,), (id_b,), "wordmatch", common, rest_a, rest_b, trace)


def _salient_pair(index, id_a, id_b, cfg):
    sa = salience.salient_phrases(index, id_a, cfg.k, cfg.mu, cfg.epsilon)
    sb = salience.salient_phrases(index, id_b, cfg.k, cfg.mu, cfg.epsilon)
    if not sa.pids or not sb.pids:
        raise ValueError("empty salient set")
    return sorted(sa.pids), sorted(sb.pids)


def _partition_result(index, id_a, id_b, name, s_ids, sp_ids, score_a, score_b, in_common):
    """Assemble C = {p in S u S': in_common(p)}, Q = S \\ C, Q' = S' \\ C."""
    union = sorted(set(s_ids) | set(sp_ids))
    c_ids = [p for p in union if in_common(p)]
    c_set = set(c_ids)
    common = sorted(((index.phrases[p].text, min(score_a[p], score_b[p])) for p in c_ids),
                    key=lambda t: (-t[1], t[0]))
    rest_a = sorted(((index.phrases[p].text, score_a[p]) for p in s_ids if p not in c_set),
                    key=lambda t: (-t[1], t[0]))
    rest_b = sorted(((index.phrases[p].text, score_b[p]) for p in sp_ids if p not in c_set),
                    key=lambda t: (-t[1], t[0]))
    trace = {"outer_iters": 0, "inner_iters": 0}
    return ComparisonResult((id_a,), (id_b,), name, common, rest_a, rest_b, trace)


def string_fuzzy(index, id_a, id_b, cfg):
    """Common iff the BM25 weight to both documents clears the threshold."""
    ja, jb = index.doc_index(id_a), index.doc_index(id_b)
    s_ids, sp_ids = _salient_pair(index, id_a, id_b, cfg)
    W = index.graph.W
    col_a = W[:, ja].toarray().ravel()
    col_b = W[:, jb].toarray().ravel()
    thr = cfg.stringfuzzy_threshold
    return _partition_result(index, id_a, id_b, "stringfuzzy", s_ids, sp_ids,
                             col_a, col_b,
                             lambda p: col_a[p] > thr and col_b[p] > thr)


def _phrase_context_counts(index, pid, window):
    """Pseudo-document of a phrase: lemma counts in a +-window around each
    segment occurrence of the phrase (or of its members for pairs),
    excluding the occurrence span itself."""
    phrase = index.phrases[pid]
    if phrase.kind == "single":
        member_pids = [pid]
    else:
        member_pids = [index.phrase_pos.get(("s", m), -1) for m in phrase.members]
    wanted = {p for p in member_pids if p >= 0}
    counts = Counter()
    for j in range(index.n_docs):
        lemmas = index.lemmas[j]
        for start, length, seg_pid in index.segments[j]:
            if seg_pid in wanted:
                lo = max(0, start - window)
                hi = min(len(lemmas), start + length + window)
                counts.update(lemmas[lo:start])
                counts.update(lemmas[start + length:hi])
    return counts


def _tfidf_cosine(counts_a, counts_b, df, n):
    shared = set(counts_a) & set(counts_b)
    if not shared:
        return 0.0
    dot = sum(counts_a[w] * counts_b[w] * math.log(n / df[w]) ** 2 for w in shared)
    na = math.sqrt(sum((c * math.log(n / df[w])) ** 2 for w, c in counts_a.items()))
    nb = math.sqrt(sum((c * math.log(n / df[w])) ** 2 for w, c in counts_b.items()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return dot / (na * nb)


def context_fuzzy(index, id_a, id_b, cfg):
    """Common iff the TF-IDF cosine between the phrase's corpus-wide
    context pseudo-document and both documents clears the threshold."""
    ja, jb = index.doc_index(id_a), index.doc_index(id_b)
    s_ids, sp_ids = _salient_pair(index, id_a, id_b, cfg)
    df = _lemma_df(index)
    n = index.n_docs
    doc_a = Counter(index.lemmas[ja])
    doc_b = Counter(index.lemmas[jb])
    union = sorted(set(s_ids) | set(sp_ids))
    cos_a, cos_b = {}, {}
    for p in union:
        pseudo = _phrase_context_counts(index, p, cfg.contextfuzzy_window)
        cos_a[p] = _tfidf_cosine(pseudo, doc_a, df, n)
        cos_b[p] = _tfidf_cosine(pseudo, doc_b, df, n)
    thr = cfg.contextfuzzy_threshold
    return _partition_result(index, id_a, id_b, "contextfuzzy", s_ids, sp_ids,
                             cos_a, cos_b,
                             lambda p: cos_a[p] > thr and cos_b[p] > thr)


def context_cosine(index, pid, doc_id, window=10):
    """Cosine between one phrase's context pseudo-document and a document."""
    j = index.doc_index(doc_id)
    df = _lemma_df(index)
    pseudo = _phrase_context_counts(index, pid, window)
    return _tfidf_cosine(pseudo, Counter(index.lemmas[j]), df, index.n_docs)


def cda_nograph(index, id_a, id_b, cfg):
    """Indicator rules applied once to max-normalized BM25 relevance,
    with no propagation."""
    solver.validate_params(cfg)
    ja, jb = index.doc_index(id_a), index.doc_index(id_b)
    s_ids, sp_ids = _salient_pair(index, id_a, id_b, cfg)
    W = index.graph.W
    fa = W[:, ja].toarray().ravel()
    fb = W[:, jb].toarray().ravel()
    if fa.max() > 0:
        fa = fa / fa.max()
    if fb.max() > 0:
        fb = fb / fb.max()
    phi = commonality_vec(fa, fb)
    yc, _ = solver.common_indicator(phi, np.asarray(s_ids), np.asarray(sp_ids))
    c_ids = [int(i) for i in np.flatnonzero(yc > 0)]
    pi = distinction_vec(fa, fb, cfg.gamma)
    y, _ = solver.distinct_indicator(pi, s_ids, set(c_ids))
    yp, _ = solver.distinct_indicator(-pi, sp_ids, set(c_ids))
    common = sorted(((index.phrases[p].text, float(phi[p])) for p in c_ids),
                    key=lambda t: (-t[1], t[0]))
    rest_a = sorted(((index.phrases[p].text, float(pi[p])) for p in np.flatnonzero(y > 0)),
                    key=lambda t: (-t[1], t[0]))
    rest_b = sorted(((index.phrases[p].text, float(-pi[p])) for p in np.flatnonzero(yp > 0)),
                    key=lambda t: (-t[1], t[0]))
    trace = {"outer_iters": 1, "inner_iters": 0,
             "common_pids": c_ids, "f": fa, "fp": fb}
    return ComparisonResult((id_a,), (id_b,), "nograph", common, rest_a, rest_b, trace)


def cda_twostep(index, id_a, id_b, cfg):
    """Relevance from pure propagation (no selection feedback), then one
    indicator pass for C and for Q, Q'."""
    solver.validate_params(cfg)
    ja, jb = index.doc_index(id_a), index.doc_index(id_b)
    s_ids, sp_ids = _salient_pair(index, id_a, id_b, cfg)
    problem = PropagationProblem.from_graph(index.graph)
    n = index.n_docs
    g0 = supervision_vector(n, [ja], cfg.delta)
    gp0 = supervision_vector(n, [jb], cfg.delta)
    state = solver.RelevanceState.zeros(index.m, n, g0, gp0)
    yc0 = np.zeros(index.m)
    it, conv, loss_d, loss_dp = solver._inner_loop(problem, state, cfg, "common", yc=yc0)

    phi = commonality_vec(state.f, state.fp)
    yc, _ = solver.common_indicator(phi, np.asarray(s_ids), np.asarray(sp_ids))
    c_ids = [int(i) for i in np.flatnonzero(yc > 0)]
    pi = distinction_vec(state.f, state.fp, cfg.gamma)
    y, _ = solver.distinct_indicator(pi, s_ids, set(c_ids))
    yp, _ = solver.distinct_indicator(-pi, sp_ids, set(c_ids))
    common = sorted(((index.phrases[p].text, float(phi[p])) for p in c_ids),
                    key=lambda t: (-t[1], t[0]))
    rest_a = sorted(((index.phrases[p].text, float(pi[p])) for p in np.flatnonzero(y > 0)),
                    key=lambda t: (-t[1], t[0]))
    rest_b = sorted(((index.phrases[p].text, float(-pi[p])) for p in np.flatnonzero(yp > 0)),
                    key=lambda t: (-t[1], t[0]))
    trace = {"outer_iters": 1, "inner_iters": it, "converged": conv,
             "common_pids": c_ids, "state": state}
    return ComparisonResult((id_a,), (id_b,), "twostep", common, rest_a, rest_b, trace)


def cda_altermea(index, id_a, id_b, cfg):
    """Full alternating solver with the sum commonality and difference
    distinction measures."""
    return solver.compare_documents(index, id_a, id_b, cfg,
                                    measure="sum", method_name="altermea")


METHODS = {
    "cda": lambda index, a, b, cfg: solver.compare_documents(index, a, b, cfg),
    "nograph": cda_nograph,
    "twostep": cda_twostep,
    "altermea": cda_altermea,
    "wordmatch": lambda index, a, b, cfg: word_match(index, a, b, cfg.wordmatch_top_k),
    "stringfuzzy": string_fuzzy,
    "contextfuzzy": context_fuzzy,
}


def run_method(index, method, id_a, id_b, cfg):
    if method not in METHODS:
        raise ValueError(f"unknown method: {method!r}")
    return METHODS[method](index, id_a, id_b, cfg)
