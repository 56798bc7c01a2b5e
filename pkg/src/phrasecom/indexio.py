"""Single-file binary index format.

Layout (all integers little-endian, strings UTF-8 with a u32 byte-length
prefix, floats IEEE-754 doubles):

    magic   4 bytes  b"PCIX"
    version u32      currently 1
    params  u32 x4   max_len, min_support, window, min_pair_count
            f64 x2   bm25 k1, b

    documents
        u32 count
        per document: id str | u32 doc_len |
                      u32 lemma count, lemmas as str |
                      u32 sentence count, u32 sentence end offsets

    vocabulary
        u32 count (ids are implicit 0..m-1 in file order)
        per phrase: u8 kind (0 single, 1 pair) | u32 doc_frequency |
                    members: per member u8 word count, words as str

    postings
        per document: u32 count | (u32 pid, u32 n(p, d)) sorted by pid

    segments
        per document: u32 count | (u32 start, u8 length, i32 pid)
                      pid -1 marks a non-vocabulary unigram segment

    graph
        u64 nnz | (u32 pid, u32 doc, f64 weight) sorted by (pid, doc)

Identical corpus bytes and parameters produce identical index bytes.
"""

from __future__ import annotations

import struct

import numpy as np
import scipy.sparse as sp

from .corpus import CorpusIndex, Phrase
from .graph import BipartiteGraph

MAGIC = b"PCIX"
VERSION = 1


def _w_str(buf, s):
    raw = s.encode("utf-8")
    buf.append(struct.pack("<I", len(raw)))
    buf.append(raw)


def _r_str(mv, pos):
    (n,) = struct.unpack_from("<I", mv, pos)
    pos += 4
    return mv[pos:pos + n].tobytes().decode("utf-8"), pos + n


def write_index(index, path):
    """Serialize an index (including its graph) to ``path``."""
    if index.graph is None:
        raise ValueError("index has no graph attached; build it before writing")
    buf = [MAGIC, struct.pack("<I", VERSION)]
    buf.append(struct.pack("<IIII", index.params["max_len"], index.params["min_support"],
                           index.params["window"], index.params["min_pair_count"]))
    k1, b = index.graph.bm25_params
    buf.append(struct.pack("<dd", k1, b))

    buf.append(struct.pack("<I", index.n_docs))
    for j in range(index.n_docs):
        _w_str(buf, index.doc_ids[j])
        buf.append(struct.pack("<I", index.doc_len[j]))
        buf.append(struct.pack("<I", len(index.lemmas[j])))
        for w in index.lemmas[j]:
            _w_str(buf, w)
        buf.append(struct.pack("<I", len(index.sentence_ends[j])))
        for e in index.sentence_ends[j]:
            buf.append(struct.pack("<I", e))

    buf.append(struct.pack("<I", index.m))
    for ph in index.phrases:
        buf.append(struct.pack("<BI", 0 if ph.kind == "single" else 1, ph.doc_frequency))
        for member in ph.members:
            buf.append(struct.pack("<B", len(member)))
            for w in member:
                _w_str(buf, w)

    for j in range(index.n_docs):
        items = sorted(index.counts[j].items())
        buf.append(struct.pack("<I", len(items)))
        for pid, c in items:
            buf.append(struct.pack("<II", pid, c))

    for j in range(index.n_docs):
        buf.append(struct.pack("<I", len(index.segments[j])))
        for start, length, pid in index.segments[j]:
            buf.append(struct.pack("<IBi", start, length, pid))

    W = index.graph.W.tocoo()
    order = np.lexsort((W.col, W.row))
    buf.append(struct.pack("<Q", W.nnz))
    for k in order:
        buf.append(struct.pack("<IId", int(W.row[k]), int(W.col[k]), float(W.data[k])))

    with open(path, "wb") as fh:
        fh.write(b"".join(buf))


def read_index(path):
    """Load an index file written by :func:`write_index`."""
    with open(path, "rb") as fh:
        data = fh.read()
    mv = memoryview(data)
    if mv[:4].tobytes() != MAGIC:
        raise ValueError(f"{path}: not an index file (bad magic)")
    (version,) = struct.unpack_from("<I", mv, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported index version {version}")
    pos = 8
    max_len, min_support, window, min_pair = struct.unpack_from("<IIII", mv, pos)
    pos += 16
    k1, b = struct.unpack_from("<dd", mv, pos)
    pos += 16

    (n_docs,) = struct.unpack_from("<I", mv, pos)
    pos += 4
    doc_ids, doc_len, lemmas, sent_ends = [], [], [], []
    for _ in range(n_docs):
        doc_id, pos = _r_str(mv, pos)
        (dl,) = struct.unpack_from("<I", mv, pos)
        pos += 4
        (n_lem,) = struct.unpack_from("<I", mv, pos)
        pos += 4
        lem = []
        for _ in range(n_lem):
            w, pos = _r_str(mv, pos)
            lem.append(w)
        (n_sent,) = struct.unpack_from("<I", mv, pos)
        pos += 4
        ends = list(struct.unpack_from(f"<{n_sent}I", mv, pos))
        pos += 4 * n_sent
        doc_ids.append(doc_id)
        doc_len.append(dl)
        lemmas.append(lem)
        sent_ends.append(ends)

    (m,) = struct.unpack_from("<I", mv, pos)
    pos += 4
    phrases, phrase_pos = [], {}
    for pid in range(m):
        kind_code, df = struct.unpack_from("<BI", mv, pos)
        pos += 5
        members = []
        for _ in range(2 if kind_code else 1):
            (n_words,) = struct.unpack_from("<B", mv, pos)
            pos += 1
            words = []
            for _ in range(n_words):
                w, pos = _r_str(mv, pos)
                words.append(w)
            members.append(tuple(words))
        kind = "pair" if kind_code else "single"
        phrases.append(Phrase(pid, kind, tuple(members), df))
        key = ("p", members[0], members[1]) if kind_code else ("s", members[0])
        phrase_pos[key] = pid

    counts = []
    for _ in range(n_docs):
        (cnt,) = struct.unpack_from("<I", mv, pos)
        pos += 4
        entries = {}
        for _ in range(cnt):
            pid, c = struct.unpack_from("<II", mv, pos)
            pos += 8
            entries[pid] = c
        counts.append(entries)

    segments = []
    for _ in range(n_docs):
        (cnt,) = struct.unpack_from("<I", mv, pos)
        pos += 4
        segs = []
        for _ in range(cnt):
            start, length, pid = struct.unpack_from("<IBi", mv, pos)
            pos += 9
            segs.append((start, length, pid))
        segments.append(segs)

    (nnz,) = struct.unpack_from("<Q", mv, pos)
    pos += 8
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=float)
    for k in range(nnz):
        r, c, v = struct.unpack_from("<IId", mv, pos)
        pos += 16
        rows[k], cols[k], vals[k] = r, c, v
    W = sp.csr_matrix((vals, (rows, cols)), shape=(m, n_docs))
    row_deg = np.asarray(W.sum(axis=1)).ravel()
    col_deg = np.asarray(W.sum(axis=0)).ravel()
    isolated = [doc_ids[j] for j in range(n_docs) if col_deg[j] == 0.0]
    graph = BipartiteGraph(W, row_deg, col_deg, isolated, bm25_params=(k1, b))

    index = CorpusIndex(
        doc_ids=doc_ids,
        doc_pos={d: i for i, d in enumerate(doc_ids)},
        lemmas=lemmas,
        sentence_ends=sent_ends,
        phrases=phrases,
        phrase_pos=phrase_pos,
        counts=counts,
        segments=segments,
        doc_len=doc_len,
        params={"max_len": max_len, "min_support": min_support,
                "window": window, "min_pair_count": min_pair},
    )
    index.graph = graph
    return index
