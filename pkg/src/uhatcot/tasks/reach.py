"""DAG reachability: input encoding, BFS CoT with queue-head pointers, replay verifier."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from ..core import TokenTrace
from .common import Verdict

BOS, SEP, SEMI, HASH = "BOS", "SEP", ";", "#"
QUERY1, QUERY2 = "QUERY1", "QUERY2"
DECIMAL, BINARY = "decimal", "binary"


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class ReachabilityInstance:
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    query: tuple[int, int]
    mode: str = DECIMAL

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(u), int(v)) for u, v in self.edges))
        object.__setattr__(self, "query", (int(self.query[0]), int(self.query[1])))
        if self.mode not in (DECIMAL, BINARY):
            raise ValueError(f"mode must be {DECIMAL} or {BINARY}")
        V = self.n_vertices
        if V < 1 or any(not (0 <= u < V and 0 <= v < V) for u, v in self.edges):
            raise ValueError("edge endpoints must be vertices")
        if not all(0 <= q < V for q in self.query):
            raise ValueError("query vertices must be vertices")

    @property
    def bit_width(self) -> int:
        return max(1, math.ceil(math.log2(self.n_vertices))) if self.n_vertices > 1 else 1

    def out_edges(self, u: int) -> list[tuple[int, int]]:
        return [e for e in self.edges if e[0] == u]


def _check_acyclic(inst: ReachabilityInstance) -> list[int]:
    indeg = [0] * inst.n_vertices
    for _, v in inst.edges:
        indeg[v] += 1
    order, ready = [], deque(i for i, d in enumerate(indeg) if d == 0)
    succ: dict[int, list[int]] = {}
    for u, v in inst.edges:
        succ.setdefault(u, []).append(v)
    while ready:
        u = ready.popleft()
        order.append(u)
        for v in succ.get(u, []):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    if len(order) != inst.n_vertices:
        raise CycleError("graph has a cycle")
    return order


def reach_oracle(inst: ReachabilityInstance) -> int:
    """Reachability through the transitive closure, computed in topological order."""
    order = _check_acyclic(inst)
    s, t = inst.query
    reach = {v: {v} for v in range(inst.n_vertices)}
    succ: dict[int, list[int]] = {}
    for u, v in inst.edges:
        succ.setdefault(u, []).append(v)
    for u in reversed(order):
        for v in succ.get(u, []):
            reach[u] |= reach[v]
    return int(t in reach[s])


def reach_dfs(inst: ReachabilityInstance) -> int:
    """Plain iterative DFS, kept independent of reach_oracle and the BFS CoT."""
    s, t = inst.query
    seen, stack = set(), [s]
    while stack:
        u = stack.pop()
        if u == t:
            return 1
        if u in seen:
            continue
        seen.add(u)
        stack.extend(v for a, v in inst.edges if a == u)
    return 0


def reach_answer(inst: ReachabilityInstance) -> tuple[str, ...]:
    return (str(reach_oracle(inst)),)


def vertex_tokens(inst: ReachabilityInstance, v: int) -> list[str]:
    if inst.mode == BINARY:
        B = inst.bit_width
        return [str((v >> (B - 1 - i)) & 1) for i in range(B)]
    width = max(2, len(str(inst.n_vertices - 1)))
    return [str(v).zfill(width)]


def atom(inst: ReachabilityInstance, v: int) -> str:
    """Atomic vertex token used inside the CoT."""
    return f"v{v}" if inst.mode == BINARY else vertex_tokens(inst, v)[0]


def reach_encode(inst: ReachabilityInstance) -> TokenTrace:
    toks = [BOS]
    for u, v in inst.edges:
        toks += vertex_tokens(inst, u) + vertex_tokens(inst, v) + [SEMI]
    s, t = inst.query
    toks += [QUERY1, *vertex_tokens(inst, s), QUERY2, *vertex_tokens(inst, t), SEP]
    return TokenTrace(tuple(toks), len(toks))


def reach_decode(tokens: Sequence[str], n_vertices: int | None = None) -> ReachabilityInstance:
    """Inverse of reach_encode; the mode is read off the token shape."""
    toks = list(tokens)
    if not toks or toks[0] != BOS or toks[-1] != SEP or QUERY1 not in toks or QUERY2 not in toks:
        raise ValueError("reachability input is 'BOS edges QUERY1 s QUERY2 t SEP'")
    q1, q2 = toks.index(QUERY1), toks.index(QUERY2)
    body, src, dst = toks[1:q1], toks[q1 + 1 : q2], toks[q2 + 1 : -1]
    mode = BINARY if all(len(x) == 1 for x in src + dst) else DECIMAL
    groups, cur = [], []
    for x in body:
        if x == SEMI:
            groups.append(cur)
            cur = []
        else:
            cur.append(x)
    if cur:
        raise ValueError("edges must be ';'-terminated")
    if mode == BINARY:
        B = len(src)
        edges = [(int("".join(g[:B]), 2), int("".join(g[B:]), 2)) for g in groups]
        s, t = int("".join(src), 2), int("".join(dst), 2)
        V = n_vertices or 2 ** B
    else:
        edges = [(int(g[0]), int(g[1])) for g in groups]
        s, t = int(src[0]), int(dst[0])
        V = n_vertices or max([s, t, *[max(e) for e in edges]]) + 1
    return ReachabilityInstance(V, tuple(edges), (s, t), mode)


def partial_sums(v: int, width: int) -> list[int]:
    """0, a_0, a_1, ..., a_{B-1} with a_j the value of the low j+1 bits."""
    return [0] + [v & ((1 << (j + 1)) - 1) for j in range(width)]


def _bfs_tokens(inst: ReachabilityInstance) -> list[str]:
    s, t = inst.query
    out = [atom(inst, s)]
    if s == t:
        return out + [HASH, "1"]
    queue, visited, head = [s], {s}, 0
    while head < len(queue):
        u = queue[head]
        head += 1
        out.append(f"@{head}")
        for _, w in inst.out_edges(u):
            if w in visited:
                continue
            visited.add(w)
            queue.append(w)
            out += [atom(inst, u), atom(inst, w), SEMI]
            if w == t:
                return out + [HASH, "1"]
    return out + [HASH, "0"]


def reach_cot_bfs(inst: ReachabilityInstance) -> TokenTrace:
    _check_acyclic(inst)
    cot: list[str] = []
    if inst.mode == BINARY:
        B = inst.bit_width
        for u, v in inst.edges:
            cot += [f"v{a}" for a in partial_sums(u, B)] + [f"v{a}" for a in partial_sums(v, B)] + [SEMI]
    return reach_encode(inst).extend(cot + _bfs_tokens(inst))


def _parse_atom(inst: ReachabilityInstance, tok: str) -> int | None:
    if inst.mode == BINARY:
        if not tok.startswith("v") or not tok[1:].isdigit():
            return None
        return int(tok[1:])
    return int(tok) if tok.isdigit() and len(tok) == len(atom(inst, 0)) else None


def reach_verify(inst: ReachabilityInstance, trace: TokenTrace) -> Verdict:
    """Replay the BFS recorded in the trace step by step."""
    if trace.input != reach_encode(inst).tokens:
        return Verdict(False, None, "input does not encode the instance")
    cot = list(trace.cot)
    i = 0
    if inst.mode == BINARY:
        B = inst.bit_width
        for u, v in inst.edges:
            want = [f"v{a}" for a in partial_sums(u, B)] + [f"v{a}" for a in partial_sums(v, B)] + [SEMI]
            if cot[i : i + len(want)] != want:
                return Verdict(False, i, f"atomization of edge ({u}, {v}) is wrong")
            i += len(want)
    s, t = inst.query
    edge_set = set(inst.edges)
    if i >= len(cot) or _parse_atom(inst, cot[i]) != s:
        return Verdict(False, i, "BFS must start with the query source")
    i += 1
    queue, visited, head, found = [s], {s}, 0, s == t
    while i < len(cot) and cot[i].startswith("@"):
        if found:
            return Verdict(False, i, "BFS continues after reaching the target")
        if cot[i] != f"@{head + 1}" or head >= len(queue):
            return Verdict(False, i, f"queue pointer {cot[i]} should be @{head + 1}")
        u = queue[head]
        head += 1
        i += 1
        last = -1
        while i + 2 < len(cot) and cot[i + 2] == SEMI and not found:
            a, b = _parse_atom(inst, cot[i]), _parse_atom(inst, cot[i + 1])
            if a != u or (a, b) not in edge_set:
                return Verdict(False, i, f"({cot[i]}, {cot[i + 1]}) is not an out-edge of the queue head")
            pos = inst.edges.index((a, b))
            if pos <= last or b in visited:
                return Verdict(False, i, "edge repeated, out of order, or to a visited vertex")
            last = pos
            visited.add(b)
            queue.append(b)
            found = b == t
            i += 3
        if not found and any(w not in visited for _, w in inst.out_edges(u)):
            return Verdict(False, i, f"out-edges of the queue head were skipped")
    if cot[i:] != [HASH, str(int(found))]:
        return Verdict(False, i, f"expected '# {int(found)}' at the end of the BFS")
    if not found and head != len(queue):
        return Verdict(False, i, "BFS stopped with a nonempty queue")
    if str(reach_dfs(inst)) != cot[-1]:
        return Verdict(False, len(cot) - 1, "answer disagrees with the DFS oracle")
    return Verdict.good()
