import itertools
import math

import numpy as np
import pytest

from phrasecom.corpus import Document, build_index
from phrasecom.salience import (interestingness, interestingness_raw,
                                levenshtein_similarity,
                                normalize_interestingness,
                                pair_interestingness_raw, salient_phrases,
                                select_salient, selection_objective,
                                similarity_matrix)


def brute_force_objective(r, M, subset, mu):
    """Straight-line oracle for the selection objective."""
    q = [sum(M[a][b] * r[b] for b in range(len(r))) for a in range(len(r))]
    head = mu * sum(q[a] * r[a] for a in subset)
    tail = sum(r[a] * M[a][b] * r[b] for a in subset for b in subset)
    return head - tail


class TestInterestingness:
    def test_max_frequency_case(self):
        got = interestingness_raw(tf=4, max_tf=4, n_docs=100, df=10)
        oracle = (0.5 + 0.5 * 4 / 4) ** 2 * math.log(100 / 10)
        assert abs(got - oracle) <= 1e-9 * abs(oracle)
        assert abs(got - 2.3026) < 1e-4

    def test_everywhere_phrase_scores_zero(self):
        assert interestingness_raw(tf=7, max_tf=7, n_docs=50, df=50) == 0.0

    def test_half_frequency_case(self):
        got = interestingness_raw(tf=2, max_tf=4, n_docs=100, df=10)
        oracle = 0.75 ** 2 * math.log(10.0)
        assert abs(got - oracle) <= 1e-9 * abs(oracle)
        assert abs(got - 1.2952) < 1e-4

    def test_unknown_phrase_error(self):
        docs = [Document.from_text(f"d{i}", "web graph study") for i in range(12)]
        idx = build_index(docs, min_support=10)
        with pytest.raises(KeyError, match="unknown phrase"):
            interestingness(idx, "d0", "missing phrase")


class TestPairInterestingness:
    def test_direct_case(self):
        got = pair_interestingness_raw(tf_pair=3, tf_a=5, tf_b=6, doc_total=50,
                                       n_docs=100, df_pair=2)
        oracle = (3 / 50) / ((5 / 50) * (6 / 50)) * math.log(100 / 2)
        assert abs(got - oracle) <= 1e-9 * abs(oracle)
        assert abs(got - 19.560) < 1e-3

    def test_everywhere_pair_scores_zero(self):
        assert pair_interestingness_raw(4, 5, 6, 50, 100, 100) == 0.0

    def test_linear_in_pair_count(self):
        lo = pair_interestingness_raw(2, 5, 6, 50, 100, 2)
        hi = pair_interestingness_raw(4, 5, 6, 50, 100, 2)
        assert abs(hi - 2 * lo) <= 1e-9 * abs(hi)

    def test_zero_member_error(self):
        with pytest.raises(ValueError, match="zero count"):
            pair_interestingness_raw(3, 0, 6, 50, 100, 2)


class TestNormalize:
    def test_minmax_with_epsilon(self):
        out = normalize_interestingness([0.0, 2.3026])
        assert abs(out[0] - 1e-6) < 1e-12
        assert abs(out[1] - (1 - 1e-6)) < 1e-12

    def test_all_equal_maps_to_half(self):
        out = normalize_interestingness([1.0, 1.0])
        assert list(out) == [0.5, 0.5]

    def test_order_preserved(self):
        rng = np.random.default_rng(3)
        raw = rng.uniform(0, 5, size=20)
        out = normalize_interestingness(raw)
        assert np.all(np.argsort(raw) == np.argsort(out))
        assert np.all(out > 0) and np.all(out < 1)


class TestLevenshtein:
    def test_identical(self):
        assert levenshtein_similarity("web graph", "web graph") == 1.0

    def test_one_substitution(self):
        got = levenshtein_similarity("cat", "cut")
        assert abs(got - (1 - 1 / 3)) <= 1e-12

    def test_disjoint(self):
        assert levenshtein_similarity("ab", "xyz") == 0.0

    def test_symmetry_unit_diagonal(self):
        texts = ["web graph", "web page", "dynamic program", "cat"]
        M = similarity_matrix(texts)
        assert np.allclose(M, M.T)
        assert np.all(np.diag(M) == 1.0)
        assert np.all((M >= 0) & (M <= 1))


class TestSelectSalient:
    def test_twin_suppressed_by_diversity(self):
        # two identical-text phrases and one unrelated phrase; at a
        # trade-off where diversity bites, the brute-force optimum over
        # 2-subsets keeps one twin plus the unrelated phrase
        r = [0.9, 0.9, 0.5]
        M = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        mu = 1.25
        best = max((tuple(s) for s in itertools.combinations(range(3), 2)),
                   key=lambda s: brute_force_objective(r, M, s, mu))
        assert set(best) == {0, 2}
        picked = select_salient(r, M, k=2, mu=mu)
        assert set(picked) == set(best)
        got = selection_objective(r, M, picked, mu)
        oracle = brute_force_objective(r, M, best, mu)
        assert abs(got - oracle) <= 1e-9 * max(1.0, abs(oracle))

    def test_capacity_exceeds_supply(self):
        r = [0.9, 0.8, 0.7]
        M = np.eye(3)
        picked = select_salient(r, M, k=10, mu=3.0)
        assert sorted(picked) == [0, 1, 2]

    def test_single_candidate_gain_rule(self):
        # gain of a lone candidate is r^2 (mu q - ...) = mu*r*r - r*r
        M = np.eye(1)
        assert select_salient([0.5], M, k=1, mu=3.0) == [0]
        assert select_salient([0.5], M, k=1, mu=1.0) == []

    def test_empty_candidates(self):
        assert select_salient([], np.zeros((0, 0)), k=5, mu=3.0) == []

    def test_greedy_beats_random_subsets(self):
        rng = np.random.default_rng(17)
        n, k = 40, 8
        r = rng.uniform(0.05, 1.0, size=n)
        M = rng.uniform(0, 1, size=(n, n))
        M = (M + M.T) / 2
        np.fill_diagonal(M, 1.0)
        picked = select_salient(r, M, k=k, mu=3.0)
        h_greedy = selection_objective(r, M, picked, 3.0)
        for _ in range(100):
            subset = rng.choice(n, size=len(picked), replace=False)
            assert h_greedy >= selection_objective(r, M, list(subset), 3.0) - 1e-9

    def test_greedy_within_sanity_bound_of_optimum(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            n = int(rng.integers(5, 12))
            k = int(rng.integers(2, 5))
            r = rng.uniform(0.05, 1.0, size=n)
            M = rng.uniform(0, 1, size=(n, n))
            M = (M + M.T) / 2
            np.fill_diagonal(M, 1.0)
            picked = select_salient(r, M, k=k, mu=3.0)
            h_greedy = selection_objective(r, M, picked, 3.0)
            h_opt = max(
                selection_objective(r, M, list(s), 3.0)
                for size in range(0, k + 1)
                for s in itertools.combinations(range(n), size))
            assert h_greedy >= 0.6 * h_opt - 1e-12

    def test_operation_count_bound(self):
        rng = np.random.default_rng(5)
        n, k = 60, 12
        r = rng.uniform(0.05, 1.0, size=n)
        M = rng.uniform(0, 0.3, size=(n, n))
        M = (M + M.T) / 2
        np.fill_diagonal(M, 1.0)
        _, stats = select_salient(r, M, k=k, mu=3.0, return_stats=True)
        assert stats["pairwise_ops"] == n * n
        assert stats["scan_ops"] <= 2 * n * (k + 1)

    def test_tie_break_higher_r_then_lower_id(self):
        r = [0.5, 0.9, 0.9]
        M = np.eye(3)
        picked = select_salient(r, M, k=1, mu=3.0)
        assert picked == [1]


class TestSalientPhrases:
    def build(self):
        texts = {
            "d1": "alpha beta gamma. alpha beta study. alpha beta works. "
                  "delta epsilon here. delta epsilon now. delta epsilon end",
            "d2": "zeta eta common words. zeta eta again. zeta eta more. "
                  "iota kappa topic. iota kappa twice. iota kappa end",
        }
        docs = [Document.from_text(k, v) for k, v in texts.items()]
        return build_index(docs, min_support=3)

    def test_members_occur_in_document(self):
        idx = self.build()
        sal = salient_phrases(idx, "d1", k=30, mu=3.0)
        j = idx.doc_index("d1")
        assert sal.pids
        for pid in sal.pids:
            assert idx.counts[j].get(pid, 0) > 0

    def test_capped_at_k(self):
        idx = self.build()
        sal = salient_phrases(idx, "d1", k=2, mu=3.0)
        assert len(sal.pids) <= 2

    def test_pair_members_removed(self):
        text_b = ". ".join(f"web graph mid{i} web page tail{i}" for i in range(5))
        docs = [Document.from_text("b", text_b),
                Document.from_text("c", "other topic words. more other topic words. "
                                        "other topic again. other topic end")]
        idx = build_index(docs, min_support=3)
        pair_pids = [p.pid for p in idx.phrases if p.kind == "pair"]
        assert pair_pids, "fixture should detect a phrase pair"
        sal = salient_phrases(idx, "b", k=30, mu=3.0)
        selected = set(sal.pids)
        for pid in pair_pids:
            if pid in selected:
                for member in idx.phrases[pid].members:
                    mp = idx.phrase_pos.get(("s", member))
                    assert mp not in selected
