"""phrasecom: corpus indexing and phrase-level document comparison.

Given a document collection and a pair of documents (or document sets),
produce three phrase sets: the common phrases and the per-document
distinct phrases, by propagating relevance over a phrase-document
graph and jointly selecting phrases under commonality and distinction
objectives.
"""

from .config import RunConfig, layer_config, parse_config_file
from .corpus import (CorpusIndex, Document, build_index, lemmatize,
                     read_corpus_dir, read_corpus_jsonl, tokenize)
from .graph import BipartiteGraph, build_graph, normalize, spectral_norm
from .indexio import read_index, write_index
from .measures import (alt_commonality_sum, alt_distinction_diff,
                       commonality, distinction)
from .salience import (interestingness, levenshtein_similarity,
                       normalize_interestingness, salient_phrases,
                       select_salient)
from .solver import (ComparisonResult, ParameterError, compare_documents,
                     compare_document_sets, lambda_bound, validate_params)

__version__ = "0.1.0"
