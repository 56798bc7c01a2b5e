"""Joint phrase selection by alternating minimization.

Two problems share one machinery.  The common-phrase problem couples a
selection reward ``-lam * sum(yc_i * Phi_i)`` with two graph propagation
losses; the distinct-phrase problem does the same with the distinction
scores of both directions.  Each relevance block has a closed-form
coordinate minimizer, so an inner loop sweeps f, g, f', g' until the
propagation losses stabilize, and an outer loop re-estimates the binary
indicators from the mean-threshold constraints until the objective
stops moving.

The propagation loss for one side is

    L(f, g) = sum_ij W_ij (f_i / sqrt(Dp_ii) - g_j / sqrt(Dd_jj))^2
              + alpha * ||g - g0||^2,

evaluated here in its expanded form using the normalized adjacency.
Zero-degree rows and columns contribute nothing to the quadratic part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import salience
from .measures import commonality_vec, distinction_vec

_REL_GUARD = 1e-12


class ParameterError(ValueError):
    pass


def lambda_bound(alpha, gamma, delta):
    """Largest trade-off weight keeping the distinct update real-valued
    and the relevance scores non-negative."""
    return min(gamma * gamma / 4.0, alpha * gamma * delta / (alpha + 1.0))


def validate_params(cfg):
    """Reject configurations outside the solvable region.

    Requires alpha, gamma, delta, lam > 0 and lam <= min(gamma^2/4,
    alpha*gamma*delta/(alpha+1)) unless force_lambda is set, in which
    case the bound is only warned about by the caller.
    """
    for name in ("alpha", "gamma", "delta"):
        if getattr(cfg, name) <= 0:
            raise ParameterError(f"{name} must be positive, got {getattr(cfg, name)}")
    if cfg.lam <= 0:
        raise ParameterError(f"lambda must be positive, got {cfg.lam}")
    bound = lambda_bound(cfg.alpha, cfg.gamma, cfg.delta)
    if cfg.lam > bound and not cfg.force_lambda:
        raise ParameterError(
            f"lambda={cfg.lam} exceeds bound={bound:.6g} "
            f"= min(gamma^2/4, alpha*gamma*delta/(alpha+1))")
    if cfg.max_inner < 1 or cfg.max_outer < 1:
        raise ParameterError("iteration caps must be at least 1")
    if cfg.inner_tol <= 0 or cfg.outer_tol <= 0:
        raise ParameterError("tolerances must be positive")
    return cfg


def update_common_f(sg, f_other, yc, lam):
    """Coordinate minimizer of the common objective in f.

    f_i = S_i g / 2 - 1/(2 f'_i) + sqrt((S_i g / 2 + 1/(2 f'_i))^2
          + lam * yc_i) when f'_i > 0, else S_i g.
    """
    out = sg.copy()
    mask = f_other > 0
    if np.any(mask):
        half = 0.5 * sg[mask]
        inv = 0.5 / f_other[mask]
        out[mask] = half - inv + np.sqrt((half + inv) ** 2 + lam * yc[mask])
    return out


def update_g(stf, g0, alpha):
    """g_j = (S_.j^T f + alpha * g0_j) / (1 + alpha)."""
    return (stf + alpha * g0) / (1.0 + alpha)


def update_distinct_f(sg, sel_own, sel_other, lam, gamma):
    """Coordinate minimizer of the distinct objective in f.

    f_i = -(gamma - S_i g)/2 + sqrt(((gamma + S_i g)/2)^2
          + lam * (y_i - y'_i)).
    """
    rad = ((gamma + sg) / 2.0) ** 2 + lam * (sel_own - sel_other)
    if np.any(rad < -1e-12):
        raise ParameterError(
            "negative radicand in distinct update: lambda violates "
            "min(gamma^2/4, alpha*gamma*delta/(alpha+1))")
    return -(gamma - sg) / 2.0 + np.sqrt(np.maximum(rad, 0.0))


def propagation_loss(S, row_active, col_active, f, g, g0, alpha):
    """Expanded graph loss plus supervision term for one document side."""
    fa = f[row_active]
    ga = g[col_active]
    quad = float(fa @ fa) - 2.0 * float(f @ (S @ g)) + float(ga @ ga)
    diff = g - g0
    return quad + alpha * float(diff @ diff)


def common_indicator(phi, s_ids, sp_ids):
    """Select phrases of S u S' whose commonality score reaches the mean
    over S and the mean over S'.  Returns the 0/1 vector and the means."""
    if len(s_ids) == 0 or len(sp_ids) == 0:
        raise ValueError("salient set empty: commonality means undefined")
    mean_s = float(phi[s_ids].mean())
    mean_sp = float(phi[sp_ids].mean())
    yc = np.zeros(phi.shape[0])
    union = np.union1d(s_ids, sp_ids)
    ok = (phi[union] >= mean_s) & (phi[union] >= mean_sp)
    yc[union[ok]] = 1.0
    return yc, (mean_s, mean_sp)


def distinct_indicator(pi_own, s_ids, common_ids):
    """Select phrases of S \\ C whose distinction score reaches the mean
    over S.  Returns the 0/1 vector and the mean."""
    if len(s_ids) == 0:
        raise ValueError("salient set empty: distinction mean undefined")
    mean_s = float(pi_own[s_ids].mean())
    y = np.zeros(pi_own.shape[0])
    keep = [i for i in s_ids if i not in common_ids and pi_own[i] >= mean_s]
    y[keep] = 1.0
    return y, mean_s


@dataclass
class PropagationProblem:
    """Normalized adjacency plus the active-degree masks needed to
    evaluate the propagation losses."""
    S: sp.csr_matrix
    row_active: np.ndarray
    col_active: np.ndarray

    @classmethod
    def from_graph(cls, graph):
        return cls(graph.normalized, graph.row_deg > 0, graph.col_deg > 0)

    @property
    def shape(self):
        return self.S.shape


@dataclass
class RelevanceState:
    f: np.ndarray
    fp: np.ndarray
    g: np.ndarray
    gp: np.ndarray
    g0: np.ndarray
    gp0: np.ndarray

    @classmethod
    def zeros(cls, m, n, g0, gp0):
        return cls(np.zeros(m), np.zeros(m), np.zeros(n), np.zeros(n), g0, gp0)


def supervision_vector(n, targets, delta):
    """delta everywhere, 1 + delta on the supervised documents."""
    g0 = np.full(n, float(delta))
    g0[list(targets)] += 1.0
    return g0


def _inner_loop(problem, state, cfg, mode, yc=None, y=None, yp=None, counters=None):
    """Sweep the four relevance blocks until both propagation losses have
    relative change below inner_tol.  Returns (iterations, converged,
    loss_d, loss_dp)."""
    S = problem.S
    loss_d = propagation_loss(S, problem.row_active, problem.col_active,
                              state.f, state.g, state.g0, cfg.alpha)
    loss_dp = propagation_loss(S, problem.row_active, problem.col_active,
                               state.fp, state.gp, state.gp0, cfg.alpha)
    converged = False
    it = 0
    for it in range(1, cfg.max_inner + 1):
        sg = S @ state.g
        if mode == "common":
            state.f = update_common_f(sg, state.fp, yc, cfg.lam)
        elif mode == "distinct":
            state.f = update_distinct_f(sg, y, yp, cfg.lam, cfg.gamma)
        elif mode == "alt_common":
            state.f = sg + cfg.lam * yc
        else:  # alt_distinct
            state.f = np.maximum(sg + cfg.lam * (y - yp), 0.0)
        state.g = update_g(S.T @ state.f, state.g0, cfg.alpha)

        sgp = S @ state.gp
        if mode == "common":
            state.fp = update_common_f(sgp, state.f, yc, cfg.lam)
        elif mode == "distinct":
            state.fp = update_distinct_f(sgp, yp, y, cfg.lam, cfg.gamma)
        elif mode == "alt_common":
            state.fp = sgp + cfg.lam * yc
        else:
            state.fp = np.maximum(sgp + cfg.lam * (yp - y), 0.0)
        state.gp = update_g(S.T @ state.fp, state.gp0, cfg.alpha)

        if counters is not None:
            counters["spmv_nnz"] += 4 * S.nnz
            counters["vector_ops"] += 4 * (S.shape[0] + S.shape[1])
            counters["inner_iters"] += 1

        new_d = propagation_loss(S, problem.row_active, problem.col_active,
                                 state.f, state.g, state.g0, cfg.alpha)
        new_dp = propagation_loss(S, problem.row_active, problem.col_active,
                                  state.fp, state.gp, state.gp0, cfg.alpha)
        rel = max(abs(new_d - loss_d) / (abs(loss_d) + _REL_GUARD),
                  abs(new_dp - loss_dp) / (abs(loss_dp) + _REL_GUARD))
        loss_d, loss_dp = new_d, new_dp
        if rel < cfg.inner_tol:
            converged = True
            break
    return it, converged, loss_d, loss_dp


def _objective(lam, reward, loss_d, loss_dp):
    return -lam * reward + 0.5 * loss_d + 0.5 * loss_dp


@dataclass
class PhaseResult:
    selected: list              # pids, descending score
    scores: dict                # pid -> score at selection time
    state: RelevanceState
    objective_trace: list
    inner_iters: list
    converged: bool
    degenerate: bool
    first_pass_state: RelevanceState = None


def _rank(selected_ids, score_vec):
    order = sorted(selected_ids, key=lambda i: (-score_vec[i], i))
    return order, {int(i): float(score_vec[i]) for i in order}


def solve_common(problem, s_ids, sp_ids, g0, gp0, cfg, measure="product", counters=None):
    """Alternate relevance propagation and common-indicator estimation
    until the common objective stabilizes.  Returns a PhaseResult whose
    ``selected`` realizes the common set C."""
    m, n = problem.shape
    s_ids = np.asarray(sorted(s_ids), dtype=int)
    sp_ids = np.asarray(sorted(sp_ids), dtype=int)
    state = RelevanceState.zeros(m, n, g0, gp0)
    yc = np.zeros(m)
    mode = "common" if measure == "product" else "alt_common"
    trace, inner_iters = [], []
    first_pass = None
    converged = False
    for outer in range(1, cfg.max_outer + 1):
        it, inner_conv, loss_d, loss_dp = _inner_loop(
            problem, state, cfg, mode, yc=yc, counters=counters)
        inner_iters.append(it)
        if outer == 1:
            first_pass = RelevanceState(state.f.copy(), state.fp.copy(),
                                        state.g.copy(), state.gp.copy(), g0, gp0)
        if measure == "product":
            phi = commonality_vec(state.f, state.fp)
        else:
            phi = state.f + state.fp
        yc, _means = common_indicator(phi, s_ids, sp_ids)
        obj = _objective(cfg.lam, float(yc @ phi), loss_d, loss_dp)
        trace.append(obj)
        if outer >= 2 and abs(trace[-1] - trace[-2]) / (abs(trace[-2]) + _REL_GUARD) < cfg.outer_tol:
            converged = True
            break
    selected_ids = np.flatnonzero(yc > 0)
    order, scores = _rank(selected_ids, phi)
    return PhaseResult(order, scores, state, trace, inner_iters, converged,
                       degenerate=False, first_pass_state=first_pass)


def solve_distinct(problem, s_ids, sp_ids, common_ids, g0, gp0, cfg,
                   measure="product", counters=None):
    """Alternate relevance propagation and distinct-indicator estimation.
    Returns a pair of PhaseResults for Q (side d) and Q' (side d')."""
    m, n = problem.shape
    s_ids = np.asarray(sorted(s_ids), dtype=int)
    sp_ids = np.asarray(sorted(sp_ids), dtype=int)
    common = set(int(i) for i in common_ids)
    state = RelevanceState.zeros(m, n, g0, gp0)
    y = np.zeros(m)
    yp = np.zeros(m)
    mode = "distinct" if measure == "product" else "alt_distinct"
    trace, inner_iters = [], []
    converged = False
    for outer in range(1, cfg.max_outer + 1):
        it, inner_conv, loss_d, loss_dp = _inner_loop(
            problem, state, cfg, mode, y=y, yp=yp, counters=counters)
        inner_iters.append(it)
        if measure == "product":
            pi = distinction_vec(state.f, state.fp, cfg.gamma)
        else:
            pi = state.f - state.fp
        pi_rev = -pi
        y, _ = distinct_indicator(pi, s_ids, common)
        yp, _ = distinct_indicator(pi_rev, sp_ids, common)
        obj = _objective(cfg.lam, float(y @ pi) + float(yp @ pi_rev), loss_d, loss_dp)
        trace.append(obj)
        if outer >= 2 and abs(trace[-1] - trace[-2]) / (abs(trace[-2]) + _REL_GUARD) < cfg.outer_tol:
            converged = True
            break
    sel_q = np.flatnonzero(y > 0)
    sel_qp = np.flatnonzero(yp > 0)
    # flag instances where the mean threshold only admits boundary ties
    # or negative-score phrases (all-equal or all-negative score fields)
    degenerate = bool(
        (sel_q.size and float(pi[sel_q].max()) <= 1e-12) or
        (sel_qp.size and float(pi_rev[sel_qp].max()) <= 1e-12))
    order_q, scores_q = _rank(sel_q, pi)
    order_qp, scores_qp = _rank(sel_qp, pi_rev)
    res_q = PhaseResult(order_q, scores_q, state, trace, inner_iters, converged, degenerate)
    res_qp = PhaseResult(order_qp, scores_qp, state, trace, inner_iters, converged, degenerate)
    return res_q, res_qp


@dataclass
class ComparisonResult:
    ids_a: tuple
    ids_b: tuple
    method: str
    common: list        # (text, score) descending
    distinct_a: list
    distinct_b: list
    trace: dict

    def to_dict(self, include_objectives=False):
        pair = [self.ids_a[0] if len(self.ids_a) == 1 else list(self.ids_a),
                self.ids_b[0] if len(self.ids_b) == 1 else list(self.ids_b)]
        trace = {"outer_iters": self.trace.get("outer_iters", 0),
                 "inner_iters": self.trace.get("inner_iters", 0)}
        if include_objectives:
            trace["objective_common"] = self.trace.get("objective_common", [])
            trace["objective_distinct"] = self.trace.get("objective_distinct", [])
            trace["converged"] = self.trace.get("converged", True)
            trace["degenerate"] = self.trace.get("degenerate", False)
        return {
            "pair": pair,
            "method": self.method,
            "common": [{"text": t, "phi": s} for t, s in self.common],
            "distinct_a": [{"text": t, "pi": s} for t, s in self.distinct_a],
            "distinct_b": [{"text": t, "pi": s} for t, s in self.distinct_b],
            "trace": trace,
        }


def _salient_union(index, ids, cfg):
    union = set()
    for doc_id in ids:
        sal = salience.salient_phrases(index, doc_id, cfg.k, cfg.mu, cfg.epsilon)
        union.update(sal.pids)
    return union


def _texts(index, result):
    return [(index.phrases[pid].text, result.scores[pid]) for pid in result.selected]


def compare_document_sets(index, ids_a, ids_b, cfg, measure="product", method_name="cda"):
    """Full comparison of two disjoint document sets.

    Salient sets are the unions over members; the supervision vectors
    carry 1 + delta on every member of the corresponding set and delta
    elsewhere.  Singleton sets reduce exactly to the pairwise case.
    """
    ids_a = tuple(ids_a)
    ids_b = tuple(ids_b)
    if not ids_a or not ids_b:
        raise ValueError("document sets must be non-empty")
    if set(ids_a) & set(ids_b):
        raise ValueError(f"document sets overlap: {sorted(set(ids_a) & set(ids_b))}")
    validate_params(cfg)
    if index.graph is None:
        raise ValueError("index has no graph attached")
    docs_a = [index.doc_index(d) for d in ids_a]
    docs_b = [index.doc_index(d) for d in ids_b]

    s_ids = _salient_union(index, ids_a, cfg)
    sp_ids = _salient_union(index, ids_b, cfg)
    if not s_ids or not sp_ids:
        empty = [d for d, s in (("first set", s_ids), ("second set", sp_ids)) if not s]
        raise ValueError(f"empty salient set for {', '.join(empty)}")

    problem = PropagationProblem.from_graph(index.graph)
    n = index.n_docs
    g0 = supervision_vector(n, docs_a, cfg.delta)
    gp0 = supervision_vector(n, docs_b, cfg.delta)

    counters = {"spmv_nnz": 0, "vector_ops": 0, "inner_iters": 0}
    com = solve_common(problem, s_ids, sp_ids, g0, gp0, cfg, measure, counters)
    dis_a, dis_b = solve_distinct(problem, s_ids, sp_ids, com.selected,
                                  g0, gp0, cfg, measure, counters)
    trace = {
        "outer_iters": len(com.objective_trace) + len(dis_a.objective_trace),
        "inner_iters": counters["inner_iters"],
        "objective_common": list(com.objective_trace),
        "objective_distinct": list(dis_a.objective_trace),
        "inner_iters_common": list(com.inner_iters),
        "inner_iters_distinct": list(dis_a.inner_iters),
        "converged": com.converged and dis_a.converged,
        "degenerate": dis_a.degenerate,
        "counters": counters,
        "common_state": com.state,
        "distinct_state": dis_a.state,
        "first_pass_state": com.first_pass_state,
        "common_pids": list(com.selected),
        "distinct_pids": (list(dis_a.selected), list(dis_b.selected)),
    }
    return ComparisonResult(ids_a, ids_b, method_name,
                            _texts(index, com), _texts(index, dis_a),
                            _texts(index, dis_b), trace)


def compare_documents(index, id_a, id_b, cfg, measure="product", method_name="cda"):
    """Pairwise comparison; identical ids compare a document with itself."""
    if id_a == id_b:
        return _compare_self(index, id_a, cfg, measure, method_name)
    return compare_document_sets(index, (id_a,), (id_b,), cfg, measure, method_name)


def _compare_self(index, doc_id, cfg, measure, method_name):
    validate_params(cfg)
    if index.graph is None:
        raise ValueError("index has no graph attached")
    j = index.doc_index(doc_id)
    sal = salience.salient_phrases(index, doc_id, cfg.k, cfg.mu, cfg.epsilon)
    if not sal.pids:
        raise ValueError(f"empty salient set for {doc_id!r}")
    s_ids = set(sal.pids)
    problem = PropagationProblem.from_graph(index.graph)
    g0 = supervision_vector(index.n_docs, [j], cfg.delta)
    counters = {"spmv_nnz": 0, "vector_ops": 0, "inner_iters": 0}
    com = solve_common(problem, s_ids, s_ids, g0, g0.copy(), cfg, measure, counters)
    dis_a, dis_b = solve_distinct(problem, s_ids, s_ids, com.selected,
                                  g0, g0.copy(), cfg, measure, counters)
    trace = {
        "outer_iters": len(com.objective_trace) + len(dis_a.objective_trace),
        "inner_iters": counters["inner_iters"],
        "objective_common": list(com.objective_trace),
        "objective_distinct": list(dis_a.objective_trace),
        "converged": com.converged and dis_a.converged,
        "degenerate": dis_a.degenerate,
        "counters": counters,
        "common_state": com.state,
        "distinct_state": dis_a.state,
        "first_pass_state": com.first_pass_state,
        "common_pids": list(com.selected),
        "distinct_pids": (list(dis_a.selected), list(dis_b.selected)),
    }
    return ComparisonResult((doc_id,), (doc_id,), method_name,
                            _texts(index, com), _texts(index, dis_a),
                            _texts(index, dis_b), trace)
