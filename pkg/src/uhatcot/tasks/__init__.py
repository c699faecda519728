"""Algorithmic tasks: oracles, samplers, CoT generators and verifiers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..core import TokenTrace
from .common import DELIMITERS, Verdict, cot_length, split_segments
from .median import (
    MedianInstance, median_answer, median_cot, median_from_input, median_input, median_oracle,
    median_verify, number_tokens, scratchpad_numbers,
)
from .mult import (
    BUTTERFLIES, COMPACT, SCHOOLBOOK, MultiplicationInstance, index_hint, mult_answer, mult_cot,
    mult_cot_ntt, mult_cot_schoolbook, mult_cot_verify, mult_digit, mult_from_input, mult_input,
    mult_meta, mult_oracle, mult_segments, ntt_params,
)
from .parity import (
    Dfa, DfaInstance, ParityInstance, dfa_answer, dfa_prefix_cot, dfa_verify, empty_dfa,
    parity_answer, parity_cot, parity_dfa, parity_from_input, parity_input, parity_oracle,
    parity_verify,
)
from .reach import (
    BINARY, DECIMAL, CycleError, ReachabilityInstance, reach_answer, reach_cot_bfs, reach_decode,
    reach_dfs, reach_encode, reach_oracle, reach_verify,
)


@dataclass(frozen=True)
class Task:
    """Uniform handle on one task.  Options (stride, mode, digits, ...) pass through **opts."""

    name: str
    sample: Callable  # (np.random.Generator, n, **opts) -> instance
    input: Callable  # instance -> TokenTrace
    answer: Callable  # instance -> answer tokens
    generate: Callable  # (instance, **opts) -> TokenTrace
    verify: Callable  # (instance, trace, **opts) -> Verdict
    from_input: Callable  # (tokens, **opts) -> instance
    meta: Callable  # (instance, **opts) -> dict


def _bits(gen: np.random.Generator, n: int) -> tuple[int, ...]:
    return tuple(int(b) for b in gen.integers(0, 2, size=n))


def _sample_median(gen, n, digits=3, base=10, **_):
    top = base ** digits
    if base == 2:
        if n > top:
            raise ValueError(f"cannot draw {n} distinct {digits}-bit numbers")
        nums = gen.choice(top, size=n, replace=False)
        return MedianInstance(tuple(int(v) for v in nums), digits, base, unique=True)
    return MedianInstance(tuple(int(v) for v in gen.integers(0, top, size=n)), digits, base)


def _sample_reach(gen, n, edge_prob=0.5, mode=DECIMAL, **_):
    from ..datagen.dags import gen_dag_from, sample_query_from

    dag = gen_dag_from(gen, n, edge_prob)
    (s, t), _, _ = sample_query_from(gen, dag)
    return ReachabilityInstance(n, dag.edges, (s, t), mode)


def _strip(opts, *keys):
    return {k: opts[k] for k in keys if k in opts}


TASKS: dict[str, Task] = {
    "parity": Task(
        "parity",
        sample=lambda gen, n, **_: ParityInstance(_bits(gen, n)),
        input=parity_input,
        answer=parity_answer,
        generate=lambda inst, stride=1, **_: parity_cot(inst.x, stride),
        verify=lambda inst, trace, stride=1, **_: parity_verify(inst, trace, stride),
        from_input=lambda toks, **_: parity_from_input(toks),
        meta=lambda inst, stride=1, **_: {"N": len(inst.x), "k": stride},
    ),
    "dfa": Task(
        "dfa",
        sample=lambda gen, n, **_: DfaInstance(parity_dfa(), tuple(str(b) for b in _bits(gen, n))),
        input=lambda inst: TokenTrace(inst.word, len(inst.word)),
        answer=dfa_answer,
        generate=lambda inst, **_: dfa_prefix_cot(inst.dfa, inst.word),
        verify=lambda inst, trace, **_: dfa_verify(inst, trace),
        from_input=lambda toks, **_: DfaInstance(parity_dfa(), tuple(toks)),
        meta=lambda inst, **_: {"N": len(inst.word), "dfa": "parity"},
    ),
    "mult": Task(
        "mult",
        sample=lambda gen, n, **_: MultiplicationInstance(_bits(gen, n), _bits(gen, n)),
        input=mult_input,
        answer=mult_answer,
        generate=lambda inst, mode=COMPACT, **_: mult_cot(inst, mode),
        verify=lambda inst, trace, mode=COMPACT, **_: mult_cot_verify(inst.X, inst.Y, trace, mode),
        from_input=lambda toks, **_: mult_from_input(toks),
        meta=lambda inst, mode=COMPACT, **_: mult_meta(inst, mode),
    ),
    "median": Task(
        "median",
        sample=_sample_median,
        input=median_input,
        answer=median_answer,
        generate=lambda inst, stride=1, **_: median_cot(inst, stride),
        verify=lambda inst, trace, stride=1, **_: median_verify(inst, trace, stride),
        from_input=lambda toks, base=10, **_: median_from_input(toks, base),
        meta=lambda inst, stride=1, **_: {"N": len(inst.numbers), "B": inst.digits,
                                          "base": inst.base, "k": stride},
    ),
    "reach": Task(
        "reach",
        sample=_sample_reach,
        input=reach_encode,
        answer=reach_answer,
        generate=lambda inst, **_: reach_cot_bfs(inst),
        verify=lambda inst, trace, **_: reach_verify(inst, trace),
        from_input=lambda toks, n_vertices=None, **_: reach_decode(toks, n_vertices),
        meta=lambda inst, **_: {"V": inst.n_vertices, "E": len(inst.edges), "mode": inst.mode,
                                "query": list(inst.query)},
    ),
}


def get_task(name: str) -> Task:
    try:
        return TASKS[name]
    except KeyError:
        raise KeyError(f"unknown task {name!r}; choose from {sorted(TASKS)}") from None


def cot_verify_generic(task: str, instance, trace: TokenTrace, **opts) -> Verdict:
    """Trace must end in the oracle answer and pass the task's step check."""
    t = get_task(task)
    answer = t.answer(instance)
    if not trace.ends_with(answer):
        return Verdict(False, len(trace) - 1, f"trace does not end in the oracle answer {' '.join(answer)}")
    return t.verify(instance, trace, **opts)


__all__ = [name for name in dir() if not name.startswith("_")]
