"""Hand-built UHAT programs: the AND head, the dot-by-dot parity scratchpad and
the magnitude-ordering median head."""

from __future__ import annotations

import itertools

import numpy as np

from ..core import Alphabet
from ..vm import AttentionHead, Layer, MlpRef, UhatProgram, register_mlp
from .layout import Layout, one_hot_index

DOT_BY_DOT_CAP = 12

# layer indices (1-based) inside parity_dot_by_dot
DOT_PREP_LAYER = 1
DOT_MISMATCH_LAYER = 2
DOT_GATHER_LAYER = 3


def _zero_head(width: int) -> AttentionHead:
    z = np.zeros((width, width), dtype=np.int64)
    return AttentionHead(z, z.copy(), z.copy())


# -- AND ----------------------------------------------------------------------------------


def and_head(n: int) -> UhatProgram:
    """One layer, one head: attend to a 0 if there is one and report what was found."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lay = Layout().add("one").add("is0").add("is1").add("found0")
    d = lay.width
    embed = {"0": lay.zeros(), "1": lay.zeros()}
    for label, flag in (("0", "is0"), ("1", "is1")):
        embed[label][lay.at("one")] = 1
        embed[label][lay.at(flag)] = 1

    key, query, value = lay.matrix(), lay.matrix(), lay.matrix()
    key[lay.at("is0"), lay.at("is0")] = 1
    query[lay.at("is0"), lay.at("one")] = 1
    value[lay.at("found0"), lay.at("is0")] = 1

    out = np.zeros((2, d), dtype=np.int64)
    out[0, lay.at("found0")] = 1
    out[1, lay.at("one")] = 1
    out[1, lay.at("found0")] = -1
    return UhatProgram(
        width=d,
        layers=(Layer((AttentionHead(key, query, value),)),),
        embed=embed,
        pos=np.zeros((n + 1, d), dtype=np.int64),
        out_map=out,
        out_alphabet=Alphabet(("0", "1")),
        name=f"and_head[{n}]",
        meta={"family": "and_head", "n": n, "layout": lay.to_params()},
    )


# -- dot-by-dot parity ---------------------------------------------------------------------

DOT = "."
HASH = "#"


def dot_bitstring(n: int, i: int) -> tuple[int, ...]:
    """Bit string carried by the i-th dot (1-based): binary of i-1, MSB first."""
    return tuple(((i - 1) >> (n - 1 - r)) & 1 for r in range(n))


def _dot_layout(n: int) -> Layout:
    lay = Layout()
    lay.add("one").add("is0").add("is1").add("isdot").add("ishash")
    lay.add("src", n)          # one-hot input position, inputs only
    lay.add("xi", n)           # bit string of a dot position
    lay.add("xipar")           # parity of that bit string
    lay.add("nexthash")        # last dot: next token is '#'
    lay.add("key", 2 * n)      # mismatch-head keys
    lay.add("val", 2 * n)      # mismatch-head values
    lay.add("mm", 2 * n)       # retrieved value
    lay.add("match")           # dot found no mismatch
    lay.add("res")             # retrieved parity
    lay.add("out", 4)
    return lay


DOT_OUT = (DOT, HASH, "0", "1")


def parity_dot_by_dot(n: int, cap: int = DOT_BY_DOT_CAP) -> UhatProgram:
    """Parity through 2^n dots, '#', answer.

    Layer 1 only prepares the gated key/value vectors (e_j for x_j = 0,
    e_{n+j} for x_j = 1, constant -1 keys on scratchpad tokens); additive
    token + position embeddings cannot express that product directly.
    Layer 2 is the mismatch head: the dot carrying bit string xi queries with
    (xi, 1 - xi), so an input position scores 1 exactly when x_j != xi_j,
    0 on agreement and -n on scratchpad positions.  Layer 3 at '#' attends to
    the single dot whose check found no mismatch (score 1 against 0
    everywhere else) and copies that dot's hard-coded parity.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > cap:
        raise ValueError(f"dot-by-dot scratchpad capped at n={cap} (2^n dots)")
    lay = _dot_layout(n)
    d = lay.width
    n_dots = 2 ** n
    n_max = n + n_dots + 2

    embed = {label: lay.zeros() for label in ("0", "1", DOT, HASH)}
    for label, flag in (("0", "is0"), ("1", "is1"), (DOT, "isdot"), (HASH, "ishash")):
        embed[label][lay.at("one")] = 1
        embed[label][lay.at(flag)] = 1

    pos = np.zeros((n_max, d), dtype=np.int64)
    for j in range(1, n + 1):
        pos[j - 1, lay.at("src", j - 1)] = 1
    for i in range(1, n_dots + 1):
        xi = dot_bitstring(n, i)
        row = pos[n + i - 1]
        row[lay["xi"]] = xi
        row[lay.at("xipar")] = sum(xi) % 2
    pos[n + n_dots - 1, lay.at("nexthash")] = 1

    prep = Layer((_zero_head(d),), MlpRef("dot_prep", {"n": n, "layout": lay.to_params()}))

    key, query, value = lay.matrix(), lay.matrix(), lay.matrix()
    for r in range(2 * n):
        key[lay.at("key", r), lay.at("key", r)] = 1
        value[lay.at("mm", r), lay.at("val", r)] = 1
    for r in range(n):
        query[lay.at("key", r), lay.at("xi", r)] = 1
        query[lay.at("key", n + r), lay.at("one")] = 1
        query[lay.at("key", n + r), lay.at("xi", r)] = -1
    mismatch = Layer((AttentionHead(key, query, value),),
                     MlpRef("dot_check", {"n": n, "layout": lay.to_params()}))

    key3, query3, value3 = lay.matrix(), lay.matrix(), lay.matrix()
    key3[lay.at("match"), lay.at("match")] = 1
    query3[lay.at("match"), lay.at("one")] = 1
    value3[lay.at("res"), lay.at("xipar")] = 1
    gather = Layer((AttentionHead(key3, query3, value3),),
                   MlpRef("dot_readout", {"layout": lay.to_params()}))

    out = np.zeros((4, d), dtype=np.int64)
    for r in range(4):
        out[r, lay.at("out", r)] = 1
    return UhatProgram(
        width=d,
        layers=(prep, mismatch, gather),
        embed=embed,
        pos=pos,
        out_map=out,
        out_alphabet=Alphabet(DOT_OUT),
        name=f"parity_dot_by_dot[{n}]",
        meta={"family": "parity_dot_by_dot", "n": n, "layout": lay.to_params(),
              "attention_dim": 2 * n, "scratchpad_len": n_dots + 2},
    )


@register_mlp("dot_prep")
def _dot_prep(params):
    n = params["n"]
    lay = Layout.from_params(params["layout"])

    def f(y):
        y = y.copy()
        if y[lay.at("is0")] or y[lay.at("is1")]:
            j = one_hot_index(y[lay["src"]])
            if j is not None:
                slot = j if y[lay.at("is0")] else n + j
                y[lay.at("key", slot)] = 1
                y[lay.at("val", slot)] = 1
        elif y[lay.at("isdot")] or y[lay.at("ishash")]:
            y[lay["key"]] = -1
        return y

    return f


@register_mlp("dot_check")
def _dot_check(params):
    n = params["n"]
    lay = Layout.from_params(params["layout"])

    def f(y):
        y = y.copy()
        if not y[lay.at("isdot")]:
            return y
        slot = one_hot_index(y[lay["mm"]])
        if slot is None:
            return y
        j, bit = (slot, 0) if slot < n else (slot - n, 1)
        y[lay.at("match")] = int(y[lay.at("xi", j)] == bit)
        return y

    return f


@register_mlp("dot_readout")
def _dot_readout(params):
    lay = Layout.from_params(params["layout"])

    def f(y):
        y = y.copy()
        if y[lay.at("ishash")]:
            r = 3 if y[lay.at("res")] == 1 else 2
        elif y[lay.at("nexthash")]:
            r = 1
        else:
            r = 0
        y[lay.at("out", r)] = 1
        return y

    return f


def dot_by_dot_cot(n: int) -> tuple[str, ...]:
    """Scratchpad tokens before the answer: 2^n dots then '#'."""
    return (DOT,) * (2 ** n) + (HASH,)


# -- median ordering head --------------------------------------------------------------------

SEP = "SEP"
EOS = "EOS"


def ordering_matrix(size: int) -> np.ndarray:
    """(K^T Q)_{uw} = -1 if u <= w else size + w - u, over one-hot slots 0..size-1."""
    m = np.zeros((size, size), dtype=np.int64)
    for u, w in itertools.product(range(size), repeat=2):
        m[u, w] = -1 if u <= w else size + w - u
    return m


def median_sorter(n: int, value_range: int) -> UhatProgram:
    """Emit the n input numbers in increasing order, stopping after floor(n/2)+1.

    Input: n number tokens ("0".."value_range-1") then SEP.  Numbers arrive
    already aggregated, one-hot in slot v+1; slot 0 stands for SEP, below
    every number.  The single head scores key slot u against query slot w
    with ordering_matrix(value_range + 1), so the last emitted number (or
    SEP) selects the next larger input number.
    """
    if n < 1 or value_range < 1:
        raise ValueError("n and value_range must be >= 1")
    slots = value_range + 1
    lay = Layout().add("one").add("val", slots).add("next", slots).add("stop").add("out", slots)
    d = lay.width
    m = n // 2 + 1
    n_max = n + 1 + m + 1

    embed = {}
    for v in range(value_range):
        e = lay.zeros()
        e[lay.at("one")] = 1
        e[lay.at("val", v + 1)] = 1
        embed[str(v)] = e
    embed[SEP] = lay.zeros()
    embed[SEP][lay.at("one")] = 1
    embed[SEP][lay.at("val", 0)] = 1
    embed[EOS] = lay.zeros()
    embed[EOS][lay.at("one")] = 1

    pos = np.zeros((n_max, d), dtype=np.int64)
    pos[n + 1 + m - 1, lay.at("stop")] = 1

    key, query, value = lay.matrix(), lay.matrix(), lay.matrix()
    vs = lay["val"]
    key[vs, vs] = np.eye(slots, dtype=np.int64)
    query[vs, vs] = ordering_matrix(slots)
    for s in range(slots):
        value[lay.at("next", s), lay.at("val", s)] = 1

    out_alpha = tuple(str(v) for v in range(value_range)) + (EOS,)
    out = np.zeros((len(out_alpha), d), dtype=np.int64)
    for r in range(len(out_alpha)):
        out[r, lay.at("out", r)] = 1
    return UhatProgram(
        width=d,
        layers=(Layer((AttentionHead(key, query, value),),
                      MlpRef("median_readout", {"layout": lay.to_params(), "range": value_range})),),
        embed=embed,
        pos=pos,
        out_map=out,
        out_alphabet=Alphabet(out_alpha),
        name=f"median_sorter[{n},{value_range}]",
        meta={"family": "median_sorter", "n": n, "value_range": value_range,
              "emissions": m, "layout": lay.to_params()},
    )


@register_mlp("median_readout")
def _median_readout(params):
    lay = Layout.from_params(params["layout"])
    eos = params["range"]

    def f(y):
        y = y.copy()
        slot = one_hot_index(y[lay["next"]])
        if y[lay.at("stop")] or slot is None or slot == 0:
            y[lay.at("out", eos)] = 1
        else:
            y[lay.at("out", slot - 1)] = 1
        return y

    return f


def median_program_input(values) -> list[str]:
    values = [int(v) for v in values]
    if len(set(values)) != len(values):
        raise ValueError("median_sorter assumes distinct numbers")
    return [str(v) for v in values] + [SEP]
