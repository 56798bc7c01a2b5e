"""Phrase-document bipartite graph with BM25 edge weights and its
degree-normalized form used for relevance propagation.

Edge (i, j) is nonzero exactly when phrase i occurs in document j.  The
normalized adjacency divides each weight by the square root of the
product of its endpoint degrees, which keeps the largest singular value
at or below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


def bm25_idf(df, n_docs):
    """Non-negative BM25 IDF: ln(1 + (n - df + 0.5) / (df + 0.5))."""
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


def bm25_score(tf, df, n_docs, dl, avgdl, k1=1.2, b=0.75):
    if tf <= 0:
        return 0.0
    norm = k1 * (1.0 - b + b * dl / avgdl)
    return bm25_idf(df, n_docs) * tf * (k1 + 1.0) / (tf + norm)


def bm25_weight(index, phrase_text, doc_id, k1=1.2, b=0.75):
    """BM25 weight of a phrase in a document, from index statistics.

    Phrase pairs are scored as one unit with their detected co-occurrence
    count as term frequency.  Raises KeyError for unknown ids.
    """
    j = index.doc_index(doc_id)
    pid = index.phrase_id(phrase_text)
    tf = index.counts[j].get(pid, 0)
    return bm25_score(tf, index.phrases[pid].doc_frequency, index.n_docs,
                      index.doc_len[j], index.avg_doc_len, k1, b)


@dataclass
class BipartiteGraph:
    W: sp.csr_matrix
    row_deg: np.ndarray
    col_deg: np.ndarray
    isolated_docs: list
    bm25_params: tuple = (1.2, 0.75)
    _normalized: sp.csr_matrix = field(default=None, repr=False)

    @property
    def normalized(self):
        if self._normalized is None:
            self._normalized = normalize(self)
        return self._normalized


def build_graph(index, k1=1.2, b=0.75):
    """Assemble W with W_ij = BM25(p_i, d_j) wherever p_i occurs in d_j."""
    m, n = index.m, index.n_docs
    avgdl = index.avg_doc_len
    rows, cols, vals = [], [], []
    for j in range(n):
        dl = index.doc_len[j]
        for pid in sorted(index.counts[j]):
            tf = index.counts[j][pid]
            w = bm25_score(tf, index.phrases[pid].doc_frequency, n, dl, avgdl, k1, b)
            rows.append(pid)
            cols.append(j)
            vals.append(w)
    W = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    row_deg = np.asarray(W.sum(axis=1)).ravel()
    col_deg = np.asarray(W.sum(axis=0)).ravel()
    isolated = [index.doc_ids[j] for j in range(n) if col_deg[j] == 0.0]
    return BipartiteGraph(W, row_deg, col_deg, isolated, bm25_params=(k1, b))


def normalize(graph):
    """Symmetric degree normalization; zero-degree rows/columns stay zero."""
    with np.errstate(divide="ignore"):
        ri = np.where(graph.row_deg > 0, 1.0 / np.sqrt(graph.row_deg), 0.0)
        ci = np.where(graph.col_deg > 0, 1.0 / np.sqrt(graph.col_deg), 0.0)
    S = sp.diags(ri) @ graph.W @ sp.diags(ci)
    return sp.csr_matrix(S)


def spectral_norm(S, iters=300, tol=1e-12):
    """Largest singular value of a sparse matrix by power iteration on
    S^T S, started from a deterministic positive vector."""
    n = S.shape[1]
    if n == 0 or S.nnz == 0:
        return 0.0
    v = np.full(n, 1.0 / math.sqrt(n))
    sigma = 0.0
    for _ in range(iters):
        w = S.T @ (S @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v_new = w / nw
        sigma_new = math.sqrt(nw)
        if abs(sigma_new - sigma) <= tol * max(1.0, sigma_new):
            return sigma_new
        sigma, v = sigma_new, v_new
    return sigma
