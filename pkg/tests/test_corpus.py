import itertools
import math

import pytest

from phrasecom.corpus import (Document, PhraseCandidate, build_index,
                              detect_phrase_pairs, lemmatize,
                              mine_frequent_patterns, score_phrase_quality,
                              segment_document, Segment, tokenize)


def doc(doc_id, text):
    return Document.from_text(doc_id, text)


class TestTokenize:
    def test_basic_with_boundary(self):
        tokens, ends = tokenize("Web graph, web pages.")
        assert tokens == ["web", "graph", "web", "pages"]
        assert ends == [4]

    def test_empty(self):
        assert tokenize("") == ([], [])

    def test_case_folding(self):
        tokens, _ = tokenize("PageRank computes PageRank")
        assert tokens == ["pagerank", "computes", "pagerank"]

    def test_multiple_sentences(self):
        tokens, ends = tokenize("One two. Three! Four; five\nsix")
        assert tokens == ["one", "two", "three", "four", "five", "six"]
        assert ends == [2, 3, 4, 5, 6]

    def test_no_empty_sentences(self):
        _, ends = tokenize("a..   . b")
        assert ends == [1, 2]


class TestLemmatize:
    def test_paper_examples(self):
        assert lemmatize(["ate"]) == ["eat"]
        assert lemmatize(["eating"]) == ["eat"]
        assert lemmatize(["graph"]) == ["graph"]

    def test_length_preserved(self):
        tokens = ["web", "graphs", "ate", "running", "xyzzy"]
        assert len(lemmatize(tokens)) == len(tokens)

    def test_unknown_passthrough(self):
        assert lemmatize(["qwkxj"]) == ["qwkxj"]

    def test_suffix_rules(self):
        assert lemmatize(["pages", "cities", "watches", "classes"]) == \
            ["page", "city", "watch", "class"]
        assert lemmatize(["planned", "studied", "agreed"]) == ["plan", "study", "agree"]
        assert lemmatize(["personalized", "programming"]) == ["personalize", "program"]


class TestMining:
    def test_twelve_doc_support(self):
        docs = [doc(f"d{i}", "the web graph here") for i in range(12)]
        cands, _, _ = mine_frequent_patterns(docs, max_len=5, min_support=10)
        assert ("web", "graph") in cands
        assert cands[("web", "graph")].support == 12

    def test_never_contiguous_absent(self):
        docs = [doc(f"d{i}", "the web graph here") for i in range(12)]
        cands, _, _ = mine_frequent_patterns(docs, max_len=5, min_support=10)
        assert ("graph", "web") not in cands

    def test_length_bound(self):
        docs = [doc(f"d{i}", "a b c d e f g") for i in range(12)]
        cands, counts, _ = mine_frequent_patterns(docs, max_len=5, min_support=10)
        assert all(len(ng) <= 5 for ng in cands)
        assert all(len(ng) <= 5 for ng in counts)

    def test_sentence_boundary_blocks_ngram(self):
        docs = [doc(f"d{i}", "alpha beta. gamma delta") for i in range(12)]
        cands, _, _ = mine_frequent_patterns(docs, max_len=5, min_support=10)
        assert ("beta", "gamma") not in cands
        assert ("alpha", "beta") in cands


class TestQuality:
    def test_unigram_convention(self):
        assert score_phrase_quality(("web",), {("web",): 50}, 100) == 1.0

    def test_pmi_separation(self):
        # halves never apart vs halves independent, same support
        bound = {("a", "b"): 20, ("a",): 20, ("b",): 20}
        indep = {("c", "d"): 20, ("c",): 200, ("d",): 200}
        total = 2000
        q_bound = score_phrase_quality(("a", "b"), bound, total)
        q_indep = score_phrase_quality(("c", "d"), indep, total)
        assert q_bound >= q_indep
        assert q_bound > q_indep  # strict on this construction

    def test_positive_list_bonus(self):
        counts = {("a", "b"): 20, ("a",): 40, ("b",): 40}
        plain = score_phrase_quality(("a", "b"), counts, 1000)
        listed = score_phrase_quality(("a", "b"), counts, 1000, positives={("a", "b")})
        affix = score_phrase_quality(("a", "b"), counts, 1000, positives={("a",)})
        assert listed >= plain
        assert affix >= plain
        assert listed >= affix

    def test_range(self):
        counts = {("a", "b"): 10, ("a",): 500, ("b",): 500}
        q = score_phrase_quality(("a", "b"), counts, 1000, positives={("a", "b")})
        assert 0.0 <= q <= 1.0


def enumerate_segmentations(sent, log_scores, max_len):
    """Oracle: brute-force all segmentations under the same scoring and
    tie rules (fewer segments, then leftmost-longest)."""
    n = len(sent)
    best = None
    for cuts in itertools.product([0, 1], repeat=n - 1):
        lengths = []
        run = 1
        for c in cuts:
            if c:
                lengths.append(run)
                run = 1
            else:
                run += 1
        lengths.append(run)
        if any(l > max_len for l in lengths):
            continue
        score = 0.0
        pos = 0
        ok = True
        for l in lengths:
            ngram = tuple(sent[pos:pos + l])
            s = log_scores.get(ngram)
            if s is None:
                if l > 1:
                    ok = False
                    break
                s = -1e9
            score += s
            pos += l
        if not ok:
            continue
        key = (score, -len(lengths), tuple(lengths))
        if best is None or key > best[0]:
            best = (key, lengths)
    return best[1]


class TestSegmentation:
    def test_high_quality_trigram_single_segment(self):
        d = doc("d", "personalized web search")
        scores = {
            ("personalize", "web", "search"): math.log(0.9 * 10 / 1000),
            ("personalize",): math.log(12 / 1000),
            ("web",): math.log(12 / 1000),
            ("search",): math.log(12 / 1000),
        }
        segs = segment_document(d, scores, max_len=5)
        assert [s.lemmas for s in segs] == [("personalize", "web", "search")]
        oracle = enumerate_segmentations(d.lemmas, scores, 5)
        assert [s.length for s in segs] == oracle

    def test_no_multiword_candidate_all_unigrams(self):
        d = doc("d", "alpha beta gamma")
        scores = {("alpha",): -3.0, ("beta",): -3.0, ("gamma",): -3.0}
        segs = segment_document(d, scores, max_len=5)
        assert [s.length for s in segs] == [1, 1, 1]

    def test_overlapping_higher_split_wins(self):
        d = doc("d", "a b c")
        scores = {("a", "b"): -2.0, ("b", "c"): -1.0,
                  ("a",): -4.0, ("b",): -4.0, ("c",): -4.0}
        segs = segment_document(d, scores, max_len=5)
        # (a)(b c): -4 - 1 = -5 beats (a b)(c): -2 - 4 = -6
        assert [s.lemmas for s in segs] == [("a",), ("b", "c")]
        oracle = enumerate_segmentations(d.lemmas, scores, 5)
        assert [s.length for s in segs] == oracle

    def test_exact_tie_prefers_leftmost_longest(self):
        d = doc("d", "a b c")
        scores = {("a", "b"): -2.0, ("b", "c"): -2.0,
                  ("a",): -4.0, ("b",): -4.0, ("c",): -4.0}
        segs = segment_document(d, scores, max_len=5)
        assert [s.lemmas for s in segs] == [("a", "b"), ("c",)]
        oracle = enumerate_segmentations(d.lemmas, scores, 5)
        assert [s.length for s in segs] == oracle

    def test_partition_property(self):
        d = doc("d", "one two three four. five six seven")
        scores = {("one", "two"): -2.0, ("five", "six", "seven"): -2.0,
                  **{(w,): -5.0 for w in d.lemmas}}
        segs = segment_document(d, scores, max_len=5)
        covered = sorted(p for s in segs for p in range(s.start, s.start + s.length))
        assert covered == list(range(len(d.lemmas)))

    def test_random_instances_match_oracle(self):
        import numpy as np
        rng = np.random.default_rng(11)
        vocab = ["w%d" % i for i in range(6)]
        for _ in range(40):
            n = int(rng.integers(2, 8))
            sent = [vocab[int(rng.integers(0, len(vocab)))] for _ in range(n)]
            d = doc("d", " ".join(sent))
            scores = {(w,): float(-rng.uniform(2, 8)) for w in set(sent)}
            for _ in range(4):
                i = int(rng.integers(0, n))
                j = int(rng.integers(i + 1, min(n, i + 5) + 1))
                if j - i >= 2:
                    scores[tuple(sent[i:j])] = float(-rng.uniform(1, 6))
            segs = segment_document(d, scores, max_len=5)
            oracle = enumerate_segmentations(d.lemmas, scores, 5)
            assert [s.length for s in segs] == oracle


def seg(start, lemmas):
    return Segment(start, len(lemmas), tuple(lemmas))


class TestPhrasePairs:
    def test_four_cooccurrences_emit(self):
        segments = []
        pos = 0
        for _ in range(4):
            segments.append(seg(pos, ("web", "graph")))
            segments.append(seg(pos + 4, ("web", "page")))
            pos += 30
        pairs = detect_phrase_pairs(segments, window=10, min_count=4)
        assert ((("web", "graph"), ("web", "page"))) in pairs
        assert pairs[(("web", "graph"), ("web", "page"))] == 4

    def test_exactly_three_no_pair(self):
        segments = []
        pos = 0
        for _ in range(3):
            segments.append(seg(pos, ("web", "graph")))
            segments.append(seg(pos + 4, ("web", "page")))
            pos += 30
        assert detect_phrase_pairs(segments, window=10, min_count=4) == {}

    def test_eleven_apart_no_pair(self):
        segments = []
        pos = 0
        for _ in range(6):
            segments.append(seg(pos, ("web", "graph")))
            segments.append(seg(pos + 11, ("web", "page")))
            pos += 40
        assert detect_phrase_pairs(segments, window=10, min_count=4) == {}

    def test_unigram_segments_ignored(self):
        segments = []
        for k in range(6):
            segments.append(seg(k * 20, ("web",)))
            segments.append(seg(k * 20 + 2, ("web", "page")))
        assert detect_phrase_pairs(segments, window=10, min_count=4) == {}

    def test_order_normalized(self):
        segments = []
        for k in range(5):
            segments.append(seg(k * 30, ("z", "z")))
            segments.append(seg(k * 30 + 3, ("a", "a")))
        pairs = detect_phrase_pairs(segments, window=10, min_count=4)
        assert list(pairs) == [(("a", "a"), ("z", "z"))]


class TestBuildIndex:
    def corpus(self):
        texts = {
            "d1": "web graph analysis. web graph mining. the web graph again. "
                  "random walk on web graph. web graph",
            "d2": "web graph ranking. link analysis ranking. ranking the web graph. "
                  "web graph and link analysis. link analysis",
            "d3": "random walk theory. random walk models. one more random walk. "
                  "random walk again",
        }
        return [doc(k, v) for k, v in texts.items()]

    def test_duplicate_id_rejected(self):
        docs = [doc("a", "x y"), doc("a", "z w")]
        with pytest.raises(ValueError, match="duplicate document id.*a"):
            build_index(docs)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError, match="empty corpus"):
            build_index([])

    def test_document_frequency_counts(self):
        idx = build_index(self.corpus(), min_support=3)
        pid = idx.phrase_id("web graph")
        assert idx.phrases[pid].doc_frequency == 2
        total = sum(1 for j in range(idx.n_docs) if idx.counts[j].get(pid, 0) > 0)
        assert total == idx.phrases[pid].doc_frequency

    def test_count_consistency_invariant(self):
        idx = build_index(self.corpus(), min_support=3)
        for pid in range(idx.m):
            occ = sum(idx.counts[j].get(pid, 0) for j in range(idx.n_docs))
            df = idx.phrases[pid].doc_frequency
            docs_with = sum(1 for j in range(idx.n_docs) if idx.counts[j].get(pid, 0) > 0)
            assert occ >= df >= 1
            assert docs_with == df

    def test_segment_partition_invariant(self):
        idx = build_index(self.corpus(), min_support=3)
        for j in range(idx.n_docs):
            covered = sorted(p for start, length, _ in idx.segments[j]
                             for p in range(start, start + length))
            assert covered == list(range(len(idx.lemmas[j])))

    def test_pair_strictness_invariant(self):
        idx = build_index(self.corpus(), min_support=3)
        for j in range(idx.n_docs):
            for pid, c in idx.counts[j].items():
                if idx.phrases[pid].kind == "pair":
                    assert c > 3

    def test_deterministic_rebuild(self):
        a = build_index(self.corpus(), min_support=3)
        b = build_index(self.corpus(), min_support=3)
        assert [p.text for p in a.phrases] == [p.text for p in b.phrases]
        assert a.counts == b.counts
        assert a.doc_len == b.doc_len
