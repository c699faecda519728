"""Synthetic corpora and DAG sampling."""

from .corpora import (
    Corpus, default_mult_sizes, gen_median_corpus, gen_mult_corpus, gen_parity_corpus,
    gen_reach_corpus, median_test_size, verify_corpus, worker_count,
)
from .dags import (
    UNREACHABLE, DagSample, chain_dag, dag_from_edges, gen_dag, gen_dag_from, sample_query,
    sample_query_from, wl_hash,
)

__all__ = [name for name in dir() if not name.startswith("_")]
