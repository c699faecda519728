"""Random DAGs from lower-triangular adjacency matrices, WL fingerprints, query sampling."""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..core import rng

UNREACHABLE = -1


@dataclass(frozen=True, eq=False)
class DagSample:
    n_vertices: int
    adjacency: np.ndarray  # adjacency[i, j] -> edge i -> j; only i > j
    edges: tuple[tuple[int, int], ...]
    distances: np.ndarray  # shortest path length, UNREACHABLE if none
    wl: str = ""
    meta: dict = field(default_factory=dict)


def _distances(n: int, edges) -> np.ndarray:
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        succ[u].append(v)
    dist = np.full((n, n), UNREACHABLE, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for v in succ[u]:
                if dist[s, v] == UNREACHABLE:
                    dist[s, v] = dist[s, u] + 1
                    q.append(v)
    return dist


def dag_from_edges(n: int, edges, wl_rounds: int | None = None) -> DagSample:
    edges = tuple(sorted((int(u), int(v)) for u, v in edges))
    adj = np.zeros((n, n), dtype=bool)
    for u, v in edges:
        adj[u, v] = True
    dag = DagSample(n, adj, edges, _distances(n, edges))
    return DagSample(n, adj, edges, dag.distances, wl_hash(dag, wl_rounds))


def gen_dag_from(gen: np.random.Generator, n: int, edge_prob: float = 0.5) -> DagSample:
    if n < 2:
        raise ValueError("need at least 2 vertices")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    draws = gen.random((n, n)) < edge_prob
    adj = np.tril(draws, k=-1)
    edges = [(int(i), int(j)) for i, j in zip(*np.nonzero(adj))]
    return dag_from_edges(n, edges)


def gen_dag(n: int, edge_prob: float = 0.5, seed: int = 0) -> DagSample:
    return gen_dag_from(rng(seed), n, edge_prob)


def _digest(*parts) -> str:
    return hashlib.blake2b(repr(parts).encode(), digest_size=16).hexdigest()


def wl_hash(dag: DagSample, rounds: int | None = None) -> str:
    """Directed Weisfeiler-Lehman fingerprint; in- and out-neighbour multisets kept apart."""
    n = dag.n_vertices
    rounds = n if rounds is None else rounds
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    preds: list[list[int]] = [[] for _ in range(n)]
    succs: list[list[int]] = [[] for _ in range(n)]
    for u, v in dag.edges:
        succs[u].append(v)
        preds[v].append(u)
    labels = ["" for _ in range(n)]
    history = []
    for _ in range(rounds):
        labels = [
            _digest(labels[v], sorted(labels[u] for u in preds[v]), sorted(labels[w] for w in succs[v]))
            for v in range(n)
        ]
        history.append(tuple(sorted(labels)))
    return _digest(n, len(dag.edges), history)


def sample_query_from(gen: np.random.Generator, dag: DagSample):
    """((source, target), label, meta).

    Half the mass goes uniformly to unconnected ordered pairs (label 0); the
    other half picks a distance uniformly, then a pair at that distance.
    Pairs (i, i) are never drawn.
    """
    d = dag.distances
    n = dag.n_vertices
    unconnected = [(i, j) for i in range(n) for j in range(n) if i != j and d[i, j] == UNREACHABLE]
    buckets: dict[int, list[tuple[int, int]]] = {}
    for i in range(n):
        for j in range(n):
            if i != j and d[i, j] > 0:
                buckets.setdefault(int(d[i, j]), []).append((i, j))
    meta = {}
    if not unconnected and not buckets:
        raise ValueError("graph has no ordered vertex pairs")
    if not buckets:
        connected = False
        meta["degenerate"] = "no connected pairs"
    elif not unconnected:
        connected = True
        meta["degenerate"] = "no unconnected pairs"
    else:
        connected = bool(gen.random() < 0.5)
    if not connected:
        pair = unconnected[int(gen.integers(len(unconnected)))]
        return pair, 0, meta
    dists = sorted(buckets)
    dist = dists[int(gen.integers(len(dists)))]
    bucket = buckets[dist]
    pair = bucket[int(gen.integers(len(bucket)))]
    meta["distance"] = dist
    return pair, 1, meta


def sample_query(dag: DagSample, seed: int = 0):
    return sample_query_from(rng(seed), dag)


def chain_dag(n: int) -> DagSample:
    """n-1 -> n-2 -> ... -> 0, following the lower-triangular convention."""
    return dag_from_edges(n, [(i + 1, i) for i in range(n - 1)])
