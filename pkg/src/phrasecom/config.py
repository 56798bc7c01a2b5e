"""Run configuration shared by the library, the evaluation harness, and
the command line tool.

Values layer as flag > config file > default.  Config files are flat
``key = value`` text; blank lines and ``#`` comments are ignored.  The
``lambda`` key is accepted as an alias for ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass
class RunConfig:
    # phrase mining / segmentation
    max_len: int = 5
    min_support: int = 10
    window: int = 10
    min_pair_count: int = 4
    nonseg_ratio: float = 0.05
    # salient phrase selection
    k: int = 30
    mu: float = 3.0
    epsilon: float = 1e-6
    # graph
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    # solver
    alpha: float = 100.0
    lam: float = 0.099
    gamma: float = 1.0
    delta: float = 0.1
    inner_tol: float = 1e-4
    outer_tol: float = 1e-4
    max_inner: int = 50
    max_outer: int = 5
    force_lambda: bool = False
    # baselines
    wordmatch_top_k: int = 20
    stringfuzzy_threshold: float = 3.0
    contextfuzzy_window: int = 10
    contextfuzzy_threshold: float = 0.05
    # evaluation
    seed: int = 42
    high_cut: float = 0.6
    low_min: float = 0.05
    low_max: float = 0.2
    perfect_only: bool = False


_ALIASES = {"lambda": "lam"}
_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name, value):
    kind = _FIELD_TYPES[name]
    if isinstance(value, str):
        if kind == "bool":
            return value.strip().lower() in ("1", "true", "yes", "on")
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        return value
    return value


def parse_config_file(path):
    """Parse a flat ``key = value`` config file into a dict of overrides."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = _ALIASES.get(key.strip(), key.strip())
            if key not in _FIELD_TYPES:
                raise ValueError(f"{path}: line {lineno}: unknown key {key!r}")
            out[key] = _coerce(key, value.strip())
    return out


def layer_config(file_overrides=None, flag_overrides=None):
    """Build a RunConfig from defaults, then file values, then flags."""
    cfg = RunConfig()
    for source in (file_overrides, flag_overrides):
        if source:
            clean = {}
            for key, value in source.items():
                key = _ALIASES.get(key, key)
                if value is None:
                    continue
                clean[key] = _coerce(key, value)
            cfg = replace(cfg, **clean)
    return cfg
