"""Command line interface.

Subcommands: index, salient, compare, compare-sets, eval, sample-pairs.
Configuration layers as flag > config file > default; the config file is
located via --config or the PHRASECOM_CONFIG environment variable.
All output is deterministic for fixed inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import baselines, evaluation, graph, indexio, solver
from .config import RunConfig, layer_config, parse_config_file
from .corpus import build_index, read_corpus_dir, read_corpus_jsonl, read_positives
from .salience import salient_phrases

_CONFIG_ENV = "PHRASECOM_CONFIG"
_METHOD_NAMES = ("cda", "nograph", "twostep", "altermea",
                 "wordmatch", "stringfuzzy", "contextfuzzy")


def _emit(payload, out_path):
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_config(args):
    path = getattr(args, "config", None) or os.environ.get(_CONFIG_ENV)
    file_overrides = parse_config_file(path) if path else None
    flag_keys = ("k", "mu", "alpha", "lam", "gamma", "delta", "seed",
                 "min_support", "max_len", "force_lambda")
    flags = {k: getattr(args, k) for k in flag_keys if hasattr(args, k)}
    cfg = layer_config(file_overrides, flags)
    bound = solver.lambda_bound(cfg.alpha, cfg.gamma, cfg.delta)
    if cfg.force_lambda and cfg.lam > bound:
        print(f"warning: lambda={cfg.lam} exceeds the stability bound "
              f"{bound:.6g}; relevance scores may go negative", file=sys.stderr)
    return cfg


def _read_corpus(path):
    p = Path(path)
    if p.is_dir():
        return read_corpus_dir(p)
    return read_corpus_jsonl(p)


def cmd_index(args):
    cfg = _load_config(args)
    docs = _read_corpus(args.corpus)
    positives = read_positives(args.positives) if args.positives else None
    index = build_index(docs, max_len=cfg.max_len, min_support=cfg.min_support,
                        window=cfg.window, min_pair_count=cfg.min_pair_count,
                        positives=positives, nonseg_ratio=cfg.nonseg_ratio)
    index.graph = graph.build_graph(index, cfg.bm25_k1, cfg.bm25_b)
    indexio.write_index(index, args.index)

    n_pairs = sum(1 for p in index.phrases if p.kind == "pair")
    salient_sizes = []
    salient_distinct = set()
    for doc_id in index.doc_ids:
        sal = salient_phrases(index, doc_id, cfg.k, cfg.mu, cfg.epsilon)
        salient_sizes.append(len(sal.pids))
        salient_distinct.update(sal.pids)
    stats = [
        ("documents", index.n_docs),
        ("candidate phrases", index.n_candidates),
        ("vocabulary phrases", index.m),
        ("phrase pairs", n_pairs),
        ("salient phrases", len(salient_distinct)),
        ("salient phrases per doc", round(sum(salient_sizes) / index.n_docs, 2)),
        ("graph links", index.graph.W.nnz),
        ("isolated documents", len(index.graph.isolated_docs)),
    ]
    width = max(len(k) for k, _ in stats)
    for key, value in stats:
        print(f"{key:<{width}}  {value}")
    for doc_id in index.graph.isolated_docs:
        print(f"warning: document {doc_id!r} has no vocabulary phrases", file=sys.stderr)
    return 0


def cmd_salient(args):
    cfg = _load_config(args)
    index = indexio.read_index(args.index)
    index.graph.bm25_params  # loaded graph kept for later commands
    sal = salient_phrases(index, args.doc, cfg.k, cfg.mu, cfg.epsilon)
    payload = {
        "doc_id": args.doc,
        "phrases": [{"text": index.phrases[p].text, "score": sal.scores[p]}
                    for p in sal.pids],
    }
    _emit(payload, args.out)
    return 0


def cmd_compare(args):
    cfg = _load_config(args)
    index = indexio.read_index(args.index)
    result = baselines.run_method(index, args.method, args.a, args.b, cfg)
    _emit(result.to_dict(include_objectives=args.trace), args.out)
    return 0


def cmd_compare_sets(args):
    cfg = _load_config(args)
    index = indexio.read_index(args.index)
    ids_a = tuple(s for s in args.a.split(",") if s)
    ids_b = tuple(s for s in args.b.split(",") if s)
    result = solver.compare_document_sets(index, ids_a, ids_b, cfg)
    _emit(result.to_dict(include_objectives=args.trace), args.out)
    return 0


def _read_pairs(path):
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}: line {lineno}: expected 'id_a<TAB>id_b'")
            pairs.append((parts[0], parts[1]))
    return pairs


def cmd_eval(args):
    cfg = _load_config(args)
    index = indexio.read_index(args.index)
    pairs = _read_pairs(args.pairs)
    gold = evaluation.read_gold(args.gold, perfect_only=cfg.perfect_only)
    methods = [m for m in args.methods.split(",") if m]
    for m in methods:
        if m not in _METHOD_NAMES:
            raise ValueError(f"unknown method: {m!r}")
    reports = {}
    for method in methods:
        results = {}
        for id_a, id_b in pairs:
            results[f"{id_a}|{id_b}"] = baselines.run_method(index, method, id_a, id_b, cfg)
        reports[method] = evaluation.evaluate_pairs(results, gold)
    payload = {
        method: {
            "common": dict(zip(("precision", "recall", "f1"), rep["common"])),
            "distinct": dict(zip(("precision", "recall", "f1"), rep["distinct"])),
            "pairs": {
                pid: {role: (None if vals is None else
                             dict(zip(("precision", "recall", "f1"), vals)))
                      for role, vals in entry.items()}
                for pid, entry in sorted(rep["pairs"].items())
            },
        }
        for method, rep in reports.items()
    }
    _emit(payload, args.out)
    print(evaluation.report_table(reports), file=sys.stderr)
    return 0


def cmd_sample_pairs(args):
    cfg = _load_config(args)
    index = indexio.read_index(args.index)
    sample = evaluation.sample_pairs(index, args.n_high, args.n_low, args.n_random,
                                     cfg.high_cut, (cfg.low_min, cfg.low_max), cfg.seed)
    payload = {
        "high": [list(p) for p in sample["high"]],
        "low": [list(p) for p in sample["low"]],
        "random": [list(p) for p in sample["random"]],
        "shortfall": sample["shortfall"],
    }
    _emit(payload, args.out)
    return 0


def _add_common_flags(p):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--k", type=int, help="salient phrases per document")
    p.add_argument("--mu", type=float, help="interestingness/diversity trade-off")
    p.add_argument("--alpha", type=float, help="supervision strength")
    p.add_argument("--lambda", dest="lam", type=float, help="selection trade-off")
    p.add_argument("--gamma", type=float, help="distinction smoothing")
    p.add_argument("--delta", type=float, help="supervision floor")
    p.add_argument("--seed", type=int, help="sampling seed")
    p.add_argument("--force-lambda", action="store_true", default=None,
                   help="accept a lambda above the stability bound (warns)")
    p.add_argument("--out", help="write JSON output to this path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="phrasecom",
        description="Corpus indexing and phrase-level document comparison.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist a corpus index")
    p.add_argument("--corpus", required=True, help="JSON-lines file or directory of .txt")
    p.add_argument("--index", required=True, help="output index path")
    p.add_argument("--positives", help="positive-phrase list, one per line")
    p.add_argument("--min-support", dest="min_support", type=int)
    p.add_argument("--max-len", dest="max_len", type=int)
    _add_common_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("salient", help="salient phrases of one document")
    p.add_argument("--index", required=True)
    p.add_argument("--doc", required=True)
    _add_common_flags(p)
    p.set_defaults(func=cmd_salient)

    p = sub.add_parser("compare", help="compare two documents")
    p.add_argument("--index", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--method", default="cda", choices=_METHOD_NAMES)
    p.add_argument("--trace", action="store_true", help="include objective traces")
    _add_common_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("compare-sets", help="compare two document sets")
    p.add_argument("--index", required=True)
    p.add_argument("--a", required=True, help="comma-separated ids")
    p.add_argument("--b", required=True, help="comma-separated ids")
    p.add_argument("--trace", action="store_true")
    _add_common_flags(p)
    p.set_defaults(func=cmd_compare_sets)

    p = sub.add_parser("eval", help="evaluate methods against gold labels")
    p.add_argument("--index", required=True)
    p.add_argument("--pairs", required=True, help="TSV: id_a<TAB>id_b per line")
    p.add_argument("--gold", required=True, help="TSV gold labels")
    p.add_argument("--methods", default="cda")
    p.add_argument("--perfect-only", dest="perfect_only", action="store_true", default=None)
    _add_common_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sample-pairs", help="stratified pair sample by cosine")
    p.add_argument("--index", required=True)
    p.add_argument("--n-high", type=int, default=35)
    p.add_argument("--n-low", type=int, default=35)
    p.add_argument("--n-random", type=int, default=35)
    _add_common_flags(p)
    p.set_defaults(func=cmd_sample_pairs)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
