"""Train/test corpora with derived per-instance seeds and a reproducibility manifest."""

from __future__ import annotations

import hashlib
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable

from ..core import CorpusRecord, rng
from ..tasks import (
    COMPACT, MedianInstance, MultiplicationInstance, ParityInstance, ReachabilityInstance,
    get_task,
)
from .dags import gen_dag_from, sample_query_from

WORKERS_ENV = "UHATCOT_WORKERS"
TRAIN, TEST = 0, 1

# default training-set sizes by operand length; 10,000 test instances throughout
MULT_TRAIN_SMALL = 50_000
MULT_TRAIN_LARGE = 5_000_000
MULT_TEST = 10_000


def worker_count() -> int:
    """Parallelism only; never changes the generated data."""
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _pmap(fn: Callable, items: list) -> list:
    w = worker_count()
    if w == 1 or len(items) < 64:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * w))))


@dataclass
class Corpus:
    task: str
    train: list[CorpusRecord]
    test: list[CorpusRecord]
    params: dict = field(default_factory=dict)

    def split_text(self, split: str) -> str:
        records = self.train if split == "train" else self.test
        return "".join(r.to_json() + "\n" for r in records)

    def manifest(self) -> dict:
        return {
            "task": self.task,
            "params": self.params,
            "splits": {
                s: {"count": len(getattr(self, s)),
                    "sha256": hashlib.sha256(self.split_text(s).encode()).hexdigest()}
                for s in ("train", "test")
            },
        }

    def write(self, outdir) -> dict:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        for s in ("train", "test"):
            (out / f"{s}.jsonl").write_text(self.split_text(s))
        manifest = self.manifest()
        (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        return manifest


def _record(task: str, inst, opts: dict, extra: dict | None = None) -> CorpusRecord:
    t = get_task(task)
    trace = t.generate(inst, **opts)
    meta = t.meta(inst, **opts)
    meta.update(extra or {})
    return CorpusRecord.from_trace(task, trace, t.answer(inst), meta)


def _draw_disjoint(draw: Callable[[int, int], tuple], key: Callable, n_test: int, n_train: int,
                   total: int | None, max_tries: int = 50) -> tuple[list, list]:
    """Draw unique test items, then train items whose key never occurs in test.

    draw(split, index) must be a pure function of its arguments.
    """
    if total is not None and n_test + n_train > total:
        raise ValueError(f"requested {n_test} test + {n_train} train instances, only {total} distinct inputs exist")
    out = []
    for split, want in ((TEST, n_test), (TRAIN, n_train)):
        chosen, seen = [], set()
        forbidden = {key(x) for x in out[0]} if split == TRAIN else set()
        idx = 0
        limit = max_tries * max(want, 1) + 1000
        while len(chosen) < want:
            batch = list(range(idx, idx + max(64, want - len(chosen))))
            idx += len(batch)
            for item in _pmap(_Draw(draw, split), batch):
                k = key(item)
                if split == TEST and k in seen:
                    continue
                if k in forbidden:
                    continue
                seen.add(k)
                chosen.append(item)
                if len(chosen) == want:
                    break
            if idx > limit:
                raise ValueError("could not draw enough distinct instances; request fewer")
        out.append(chosen)
    return out[0], out[1]


class _Draw:
    # picklable closure for process pools
    def __init__(self, fn, split):
        self.fn, self.split = fn, split

    def __call__(self, idx):
        return self.fn(self.split, idx)


def _exhaustive_split(items: list, seed: int, test_fraction: float = 0.2) -> tuple[list, list]:
    order = rng(seed, 99).permutation(len(items))
    n_test = max(1, int(round(len(items) * test_fraction))) if len(items) > 1 else 0
    test = [items[i] for i in sorted(order[:n_test])]
    train = [items[i] for i in sorted(order[n_test:])]
    return test, train


# -- median -----------------------------------------------------------------------------


def median_test_size(n: int) -> int:
    return (n + 10) * 20


class _MedianDraw:
    def __init__(self, seed, n, digits):
        self.seed, self.n, self.digits = seed, n, digits

    def __call__(self, split, idx):
        g = rng(self.seed, split, idx)
        return tuple(int(v) for v in g.integers(0, 10 ** self.digits, size=self.n))


def gen_median_corpus(n: int, count: int, seed: int, stride: int = 1, digits: int = 3,
                      test_size: int | None = None) -> Corpus:
    test_size = median_test_size(n) if test_size is None else test_size
    total = 10 ** (digits * n) if digits * n <= 18 else None
    test, train = _draw_disjoint(_MedianDraw(seed, n, digits), lambda x: x, test_size, count, total)
    opts = {"stride": stride}
    mk = lambda nums: _record("median", MedianInstance(nums, digits, 10), opts)
    return Corpus("median", [mk(x) for x in train], [mk(x) for x in test],
                  {"N": n, "count": count, "seed": seed, "stride": stride, "digits": digits,
                   "test_size": test_size, "sampling": "with replacement"})


# -- multiplication / parity ------------------------------------------------------------


def default_mult_sizes(n: int) -> tuple[int, int]:
    return (MULT_TRAIN_SMALL if n <= 11 else MULT_TRAIN_LARGE), MULT_TEST


class _BitsDraw:
    def __init__(self, seed, width):
        self.seed, self.width = seed, width

    def __call__(self, split, idx):
        g = rng(self.seed, split, idx)
        return tuple(int(b) for b in g.integers(0, 2, size=self.width))


def _bit_split(seed: int, width: int, n_train: int, n_test: int) -> tuple[list, list, bool]:
    total = 2 ** width
    if total <= n_train + n_test:
        items = list(itertools.product((0, 1), repeat=width))
        test, train = _exhaustive_split(items, seed)
        return test, train, True
    test, train = _draw_disjoint(_BitsDraw(seed, width), lambda x: x, n_test, n_train, total)
    return test, train, False


def gen_mult_corpus(n: int, seed: int, train: int | None = None, test: int | None = None,
                    mode: str = COMPACT) -> Corpus:
    d_train, d_test = default_mult_sizes(n)
    n_train = d_train if train is None else train
    n_test = d_test if test is None else test
    te, tr, exhaustive = _bit_split(seed, 2 * n, n_train, n_test)
    mk = lambda b: _record("mult", MultiplicationInstance(b[:n], b[n:]), {"mode": mode})
    return Corpus("mult", [mk(x) for x in tr], [mk(x) for x in te],
                  {"N": n, "seed": seed, "train": n_train, "test": n_test, "mode": mode,
                   "exhaustive": exhaustive})


def gen_parity_corpus(n: int, count: int, seed: int, test: int | None = None, stride: int = 1) -> Corpus:
    n_test = max(1, count // 5) if test is None else test
    te, tr, exhaustive = _bit_split(seed, n, count, n_test)
    mk = lambda b: _record("parity", ParityInstance(b), {"stride": stride})
    return Corpus("parity", [mk(x) for x in tr], [mk(x) for x in te],
                  {"N": n, "count": count, "seed": seed, "test": n_test, "stride": stride,
                   "exhaustive": exhaustive})


# -- reachability --------------------------------------------------------------------------


class _ReachDraw:
    def __init__(self, seed, n, edge_prob, mode):
        self.seed, self.n, self.edge_prob, self.mode = seed, n, edge_prob, mode

    def __call__(self, split, idx):
        g = rng(self.seed, split, idx)
        dag = gen_dag_from(g, self.n, self.edge_prob)
        pair, label, meta = sample_query_from(g, dag)
        return dag.wl, ReachabilityInstance(self.n, dag.edges, pair, self.mode), label, meta


def gen_reach_corpus(n_vertices: int, count: int, seed: int, test: int | None = None,
                     edge_prob: float = 0.5, mode: str = "decimal") -> Corpus:
    """Test graphs are drawn first; training graphs sharing a WL hash with any test graph are rejected."""
    n_test = max(1, count // 5) if test is None else test
    draw = _ReachDraw(seed, n_vertices, edge_prob, mode)
    test_items, train_items = [], []
    test_hashes: set[str] = set()
    for idx in range(n_test):
        item = draw(TEST, idx)
        test_items.append(item)
        test_hashes.add(item[0])
    idx = 0
    while len(train_items) < count:
        item = draw(TRAIN, idx)
        idx += 1
        if item[0] not in test_hashes:
            train_items.append(item)
        if idx > 100 * count + 1000:
            raise ValueError("too many training graphs collide with test graphs")

    def mk(item):
        wl, inst, label, meta = item
        return _record("reach", inst, {}, {"wl": wl, "label": label, **meta})

    return Corpus("reach", [mk(x) for x in train_items], [mk(x) for x in test_items],
                  {"V": n_vertices, "count": count, "seed": seed, "test": n_test,
                   "edge_prob": edge_prob, "mode": mode,
                   "wl": {"rounds": n_vertices, "directed": True, "neighbourhoods": "in/out"}})


def verify_corpus(records: Iterable[CorpusRecord], opts: dict | None = None) -> list[tuple[int, str]]:
    """(line index, message) for each record failing its task verifier."""
    from ..tasks import cot_verify_generic

    bad = []
    for i, r in enumerate(records):
        t = get_task(r.task)
        trace = r.trace()
        kw = dict(opts or {})
        if "k" in r.meta:
            kw.setdefault("stride", r.meta["k"])
        if "mode" in r.meta and r.task == "mult":
            kw.setdefault("mode", r.meta["mode"])
        if r.task == "reach" and "V" in r.meta:
            kw.setdefault("n_vertices", r.meta["V"])
        inst = t.from_input(trace.input, **kw)
        v = cot_verify_generic(r.task, inst, trace, **kw)
        if not v:
            bad.append((i, v.message))
    return bad
