"""Corpus ingestion and indexing: tokenization, lemmatization, frequent
phrase mining, sentence segmentation, phrase-pair detection, and the
in-memory corpus index that every other module reads from.

The index is immutable once built; per-document operations are pure
functions of the document content and the mined candidate table, so
index construction is deterministic byte-for-byte for a fixed input.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

_SENTENCE_BREAK = re.compile(r"[.?!;\n]")
_TOKEN = re.compile(r"[a-z0-9]+")

# quality floor used for unigram fallback segments that are not mined
# candidates; any finite value works, it only has to lose against every
# candidate segment of the same span
_FLOOR_LOG_SCORE = -1e9


def tokenize(text):
    """Split raw text into lowercase alphanumeric tokens.

    Returns ``(tokens, sentence_ends)`` where ``sentence_ends`` holds the
    exclusive end offset of each sentence in token coordinates.  Sentences
    break on ``. ? ! ;`` and newlines; empty sentences are dropped.
    """
    tokens = []
    ends = []
    for piece in _SENTENCE_BREAK.split(text.lower()):
        words = _TOKEN.findall(piece)
        if words:
            tokens.extend(words)
            ends.append(len(tokens))
    return tokens, ends


# Irregular forms the suffix rules below cannot reach.  Only lemma
# *identity* matters downstream, so the table aims at consistency for
# common English forms, not linguistic completeness.
_LEMMA_EXCEPTIONS = {
    "ate": "eat", "eating": "eat", "eaten": "eat", "eats": "eat",
    "went": "go", "gone": "go", "goes": "go", "going": "go",
    "was": "be", "were": "be", "is": "be", "are": "be", "am": "be", "been": "be", "being": "be",
    "has": "have", "had": "have", "having": "have",
    "did": "do", "done": "do", "does": "do", "doing": "do",
    "said": "say", "says": "say", "saying": "say",
    "made": "make", "making": "make",
    "took": "take", "taken": "take", "taking": "take",
    "came": "come", "coming": "come",
    "saw": "see", "seen": "see", "seeing": "see",
    "gave": "give", "given": "give", "giving": "give",
    "wrote": "write", "written": "write", "writing": "write",
    "found": "find", "thought": "think", "built": "build",
    "sent": "send", "paid": "pay", "held": "hold",
    "brought": "bring", "bought": "buy",
    "got": "get", "gotten": "get", "getting": "get",
    "left": "leave", "met": "meet", "lost": "lose",
    "meant": "mean", "kept": "keep", "felt": "feel", "told": "tell",
    "became": "become", "becoming": "become",
    "grew": "grow", "grown": "grow",
    "knew": "know", "known": "know",
    "ran": "run", "running": "run", "runs": "run",
    "used": "use", "using": "use", "uses": "use",
    "children": "child", "men": "man", "women": "woman",
    "mice": "mouse", "feet": "foot", "teeth": "tooth",
    "better": "good", "best": "good", "worse": "bad", "worst": "bad",
    "these": "this", "those": "that",
    "queries": "query", "indices": "index", "matrices": "matrix",
    "vertices": "vertex", "analyses": "analysis", "bases": "basis",
    "data": "data", "series": "series", "news": "news",
}

_VOWELS = set("aeiou")


def _measure(stem):
    """Porter-style VC sequence count of a stem."""
    m = 0
    prev_vowel = False
    for ch in stem:
        vowel = ch in _VOWELS
        if prev_vowel and not vowel:
            m += 1
        prev_vowel = vowel
    return m


def _ends_cvc(stem):
    if len(stem) < 3:
        return False
    c1, v, c2 = stem[-3], stem[-2], stem[-1]
    return (c1 not in _VOWELS) and (v in _VOWELS) and (c2 not in _VOWELS) and c2 not in "wxy"


def _has_vowel(stem):
    return any(ch in _VOWELS for ch in stem)


def _fix_stem(stem):
    """Post-strip fixups shared by the -ed and -ing rules."""
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem) == 1 and _ends_cvc(stem):
        return stem + "e"
    return stem


def _lemma_one(word):
    if word in _LEMMA_EXCEPTIONS:
        return _LEMMA_EXCEPTIONS[word]
    w = word
    # plural suffixes
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith(("ches", "shes", "xes", "zes")) and len(w) > 4:
        return w[:-2]
    if w.endswith("s") and not w.endswith(("ss", "us", "is")) and len(w) > 3:
        return w[:-1]
    # past tense
    if w.endswith("ied") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith("eed") and len(w) > 4:
        return w[:-1]
    if w.endswith("ed") and len(w) > 4 and _has_vowel(w[:-2]):
        return _fix_stem(w[:-2])
    # gerund
    if w.endswith("ying") and len(w) > 5:
        return w[:-4] + "y"
    if w.endswith("ing") and len(w) > 5 and _has_vowel(w[:-3]):
        return _fix_stem(w[:-3])
    return w


def lemmatize(tokens):
    """Map each token to its lemma; unknown words pass through unchanged."""
    return [_lemma_one(t) for t in tokens]


@dataclass
class Document:
    doc_id: str
    text: str
    tokens: list
    lemmas: list
    sentence_ends: list

    @classmethod
    def from_text(cls, doc_id, text):
        tokens, ends = tokenize(text)
        return cls(doc_id, text, tokens, lemmatize(tokens), ends)

    def sentences(self):
        start = 0
        for end in self.sentence_ends:
            yield self.lemmas[start:end], start
            start = end


def read_corpus_jsonl(path):
    """Read a JSON-lines corpus: one ``{"id": ..., "text": ...}`` per line."""
    docs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: invalid JSON ({exc})") from None
            if "id" not in obj or "text" not in obj:
                raise ValueError(f"{path}: line {lineno}: object needs 'id' and 'text'")
            docs.append(Document.from_text(str(obj["id"]), str(obj["text"])))
    return docs


def read_corpus_dir(path):
    """Read a directory of ``.txt`` files; the filename stem is the doc id."""
    docs = []
    for p in sorted(Path(path).glob("*.txt")):
        docs.append(Document.from_text(p.stem, p.read_text(encoding="utf-8")))
    return docs


def read_positives(path):
    """Positive-phrase list: one lowercase lemma phrase per line."""
    out = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            words = tuple(line.strip().split())
            if words:
                out.add(words)
    return out


@dataclass
class PhraseCandidate:
    lemmas: tuple
    support: int
    quality: float


def _ngram_counts(docs, max_len):
    """Counts of all contiguous lemma n-grams (n <= max_len) that do not
    cross sentence boundaries, plus the total token count."""
    counts = Counter()
    total = 0
    for doc in docs:
        for sent, _ in doc.sentences():
            total += len(sent)
            for n in range(1, max_len + 1):
                for i in range(len(sent) - n + 1):
                    counts[tuple(sent[i:i + n])] += 1
    return counts, total


def score_phrase_quality(lemmas, counts, total, positives=None):
    """Deterministic phrase quality in [0, 1].

    Combines the normalized PMI of the candidate against its best binary
    split with a completeness penalty (how often the candidate appears
    relative to its rarer half) and an additive bonus when the candidate,
    or one of its prefixes/suffixes, is listed as a positive phrase.
    Unigrams score 1.0 by convention.
    """
    lemmas = tuple(lemmas)
    if len(lemmas) == 1:
        return 1.0
    c_v = counts[lemmas]
    if c_v <= 0 or total <= 0:
        return 0.0
    p_v = c_v / total
    best = None
    for cut in range(1, len(lemmas)):
        left, right = lemmas[:cut], lemmas[cut:]
        c_l = max(counts[left], 1)
        c_r = max(counts[right], 1)
        prob = (c_l / total) * (c_r / total)
        if best is None or prob > best[0]:
            best = (prob, min(c_l, c_r))
    npmi = math.log(p_v / best[0]) / (-math.log(p_v)) if p_v < 1.0 else 1.0
    npmi = max(-1.0, min(1.0, npmi))
    base = (npmi + 1.0) / 2.0
    completeness = c_v / best[1]
    quality = base * (0.5 + 0.5 * min(1.0, completeness))
    if positives:
        if lemmas in positives:
            quality += 0.3
        else:
            affixes = [lemmas[:k] for k in range(1, len(lemmas))]
            affixes += [lemmas[k:] for k in range(1, len(lemmas))]
            if any(a in positives for a in affixes):
                quality += 0.15
    return min(1.0, quality)


def mine_frequent_patterns(docs, max_len=5, min_support=10, positives=None):
    """Mine contiguous lemma n-grams with support >= min_support.

    Returns ``(candidates, counts, total)`` where candidates maps the
    lemma tuple to a :class:`PhraseCandidate` carrying support and a
    quality score, and counts/total are the raw n-gram statistics the
    segmenter reuses.
    """
    counts, total = _ngram_counts(docs, max_len)
    candidates = {}
    for ngram, support in counts.items():
        if support >= min_support:
            q = score_phrase_quality(ngram, counts, total, positives)
            candidates[ngram] = PhraseCandidate(ngram, support, q)
    return candidates, counts, total


def segment_log_scores(candidates, counts, total):
    """Log segment scores for the Viterbi segmenter.

    A candidate segment scores ``log(quality * count / total)``; every
    corpus unigram is segmentable as a fallback with quality 1.
    """
    scores = {}
    for ngram, count in counts.items():
        if len(ngram) == 1:
            scores[ngram] = math.log(count / total)
    for ngram, cand in candidates.items():
        if cand.quality > 0.0:
            scores[ngram] = math.log(cand.quality * cand.support / total)
    return scores


@dataclass
class Segment:
    start: int
    length: int
    lemmas: tuple


def _segment_sentence(sent, offset, log_scores, max_len):
    """Best-scoring segmentation of one sentence by dynamic programming.

    Maximizes the summed log segment scores; ties prefer fewer segments,
    then leftmost-longest segments.
    """
    n = len(sent)
    # state: (score, -segments, lengths-so-far) per prefix length
    best = [None] * (n + 1)
    best[0] = (0.0, 0, ())
    for i in range(1, n + 1):
        for j in range(max(0, i - max_len), i):
            if best[j] is None:
                continue
            ngram = tuple(sent[j:i])
            s = log_scores.get(ngram)
            if s is None:
                if i - j > 1:
                    continue
                s = _FLOOR_LOG_SCORE
            cand = (best[j][0] + s, best[j][1] - 1, best[j][2] + (i - j,))
            if best[i] is None or cand > best[i]:
                best[i] = cand
    segs = []
    pos = 0
    for length in best[n][2]:
        segs.append(Segment(offset + pos, length, tuple(sent[pos:pos + length])))
        pos += length
    return segs


def segment_document(doc, log_scores, max_len=5):
    """Segment every sentence of a document into non-overlapping segments
    covering all lemmas."""
    segments = []
    for sent, offset in doc.sentences():
        segments.extend(_segment_sentence(sent, offset, log_scores, max_len))
    return segments


def detect_phrase_pairs(segments, window=10, min_count=4):
    """Detect phrase pairs within one segmented document.

    Two multi-word vocabulary phrases form a pair when their segment
    start positions fall within ``window`` words of each other strictly
    more than three times (``min_count`` occurrences, default 4).  Pair
    identity is order-normalized lexicographically.  Returns a dict
    mapping ``(lemmas_a, lemmas_b)`` to the co-occurrence count.
    """
    occ = {}
    for seg in segments:
        if seg.length > 1:
            occ.setdefault(seg.lemmas, []).append(seg.start)
    phrases = sorted(occ)
    pairs = {}
    for i in range(len(phrases)):
        for j in range(i + 1, len(phrases)):
            a, b = phrases[i], phrases[j]
            count = sum(1 for pa in occ[a] for pb in occ[b] if abs(pa - pb) <= window)
            if count >= min_count:
                pairs[(a, b)] = count
    return pairs


@dataclass
class Phrase:
    pid: int
    kind: str           # "single" | "pair"
    members: tuple      # one lemma tuple, or two for pairs
    doc_frequency: int = 0

    @property
    def text(self):
        if self.kind == "single":
            return " ".join(self.members[0])
        return "@@".join(" ".join(m) for m in self.members)


@dataclass
class CorpusIndex:
    doc_ids: list
    doc_pos: dict
    lemmas: list            # per doc: flat lemma list
    sentence_ends: list     # per doc: sentence end offsets
    phrases: list           # Phrase, ids dense 0..m-1
    phrase_pos: dict        # member key -> pid
    counts: list            # per doc: {pid: n(p, d)}
    segments: list          # per doc: [(start, length, pid or -1)]
    doc_len: list           # |P_d|: vocab segment occurrences + pair counts
    n_candidates: int = 0
    graph: object = None    # BipartiteGraph, attached after build
    params: dict = field(default_factory=lambda: {
        "max_len": 5, "min_support": 10, "window": 10, "min_pair_count": 4})
    _salient_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_docs(self):
        return len(self.doc_ids)

    @property
    def m(self):
        return len(self.phrases)

    @property
    def avg_doc_len(self):
        return sum(self.doc_len) / len(self.doc_len)

    def doc_index(self, doc_id):
        if doc_id not in self.doc_pos:
            raise KeyError(f"unknown document id: {doc_id!r}")
        return self.doc_pos[doc_id]

    def phrase_id(self, text):
        """Look up a phrase id from its rendered text."""
        if "@@" in text:
            a, b = text.split("@@", 1)
            key = ("p", tuple(a.split()), tuple(b.split()))
        else:
            key = ("s", tuple(text.split()))
        if key not in self.phrase_pos:
            raise KeyError(f"unknown phrase: {text!r}")
        return self.phrase_pos[key]

    def document_frequency(self, pid):
        return self.phrases[pid].doc_frequency

    def isolated_documents(self):
        return [self.doc_ids[j] for j in range(self.n_docs) if self.doc_len[j] == 0]


def _unigram_ratio(segments, sent_start, sent_end):
    covered = sum(s.length for s in segments if sent_start <= s.start < sent_end)
    single = sum(1 for s in segments if sent_start <= s.start < sent_end and s.length == 1)
    return single / covered if covered else 0.0


def build_index(docs, max_len=5, min_support=10, window=10, min_pair_count=4,
                positives=None, nonseg_ratio=0.05):
    """Build the corpus index: mine candidates, segment every document,
    detect phrase pairs, and assemble the phrase vocabulary with counts.

    Sentences whose unigram-segment ratio exceeds ``nonseg_ratio`` after
    the first pass are re-segmented once with candidate counts boosted by
    first-pass segment usage (a light form of Viterbi training).

    Raises ``ValueError`` on an empty corpus or a duplicate document id.
    """
    if not docs:
        raise ValueError("empty corpus")
    seen = set()
    for doc in docs:
        if not doc.doc_id:
            raise ValueError("document with empty id")
        if doc.doc_id in seen:
            raise ValueError(f"duplicate document id: {doc.doc_id!r}")
        seen.add(doc.doc_id)

    candidates, counts, total = mine_frequent_patterns(docs, max_len, min_support, positives)
    scores = segment_log_scores(candidates, counts, total)
    doc_segments = [segment_document(doc, scores, max_len) for doc in docs]

    if nonseg_ratio < 1.0:
        usage = Counter()
        for segs in doc_segments:
            for s in segs:
                if s.lemmas in candidates:
                    usage[s.lemmas] += 1
        boosted = dict(scores)
        for ngram, cand in candidates.items():
            if cand.quality > 0.0:
                boosted[ngram] = math.log(cand.quality * (cand.support + usage[ngram]) / total)
        for di, doc in enumerate(docs):
            redo = False
            start = 0
            for end in doc.sentence_ends:
                if _unigram_ratio(doc_segments[di], start, end) > nonseg_ratio:
                    redo = True
                    break
                start = end
            if redo:
                doc_segments[di] = segment_document(doc, boosted, max_len)

    doc_pairs = [detect_phrase_pairs(segs, window, min_pair_count) for segs in doc_segments]

    # vocabulary: candidate phrases that occur as segments, then pairs,
    # each block sorted for dense deterministic ids
    single_keys = sorted({s.lemmas for segs in doc_segments for s in segs
                          if s.lemmas in candidates})
    pair_keys = sorted({key for pairs in doc_pairs for key in pairs})
    phrases = []
    phrase_pos = {}
    for lemmas in single_keys:
        pid = len(phrases)
        phrase_pos[("s", lemmas)] = pid
        phrases.append(Phrase(pid, "single", (lemmas,)))
    for a, b in pair_keys:
        pid = len(phrases)
        phrase_pos[("p", a, b)] = pid
        phrases.append(Phrase(pid, "pair", (a, b)))

    index_counts = []
    doc_len = []
    seg_records = []
    for segs, pairs in zip(doc_segments, doc_pairs):
        cnt = {}
        records = []
        n_seg = 0
        for s in segs:
            pid = phrase_pos.get(("s", s.lemmas), -1)
            records.append((s.start, s.length, pid))
            if pid >= 0:
                cnt[pid] = cnt.get(pid, 0) + 1
                n_seg += 1
        n_pair = 0
        for (a, b), c in pairs.items():
            pid = phrase_pos[("p", a, b)]
            cnt[pid] = c
            n_pair += c
        index_counts.append(cnt)
        seg_records.append(records)
        doc_len.append(n_seg + n_pair)

    for cnt in index_counts:
        for pid in cnt:
            phrases[pid].doc_frequency += 1

    return CorpusIndex(
        doc_ids=[d.doc_id for d in docs],
        doc_pos={d.doc_id: i for i, d in enumerate(docs)},
        lemmas=[d.lemmas for d in docs],
        sentence_ends=[d.sentence_ends for d in docs],
        phrases=phrases,
        phrase_pos=phrase_pos,
        counts=index_counts,
        segments=seg_records,
        doc_len=doc_len,
        n_candidates=len(candidates),
        params={"max_len": max_len, "min_support": min_support,
                "window": window, "min_pair_count": min_pair_count},
    )
