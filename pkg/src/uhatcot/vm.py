"""Exact interpreter for unique-hard-attention transformers with causal masking.

Activations are integer (int64) vectors when every program parameter is an
integer, and ``Fraction`` object vectors otherwise.  Both paths are exact;
attention argmaxes never see a rounded number.
"""

from __future__ import annotations

import csv
import importlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import IO, Callable, Iterable, Sequence

import numpy as np

from .core import Alphabet, TokenTrace

LEFTMOST = "leftmost"
RIGHTMOST = "rightmost"

# int64 scores are used while |key|*|query|*d stays below this bound
_INT_SAFE = 1 << 62


class ContextOverflow(ValueError):
    pass


class UnknownToken(KeyError):
    pass


class DecodeError(RuntimeError):
    """Decoding did not reach a stop token within the step budget."""


# -- exact arrays -------------------------------------------------------------


def exact_array(values, shape=None) -> np.ndarray:
    """int64 array if every entry is integral, else an object array of Fractions."""
    arr = np.asarray(values, dtype=object)
    if shape is not None:
        arr = arr.reshape(shape)
    flat = [Fraction(v) if not isinstance(v, (str, Fraction)) else Fraction(v) for v in arr.ravel()]
    if all(f.denominator == 1 for f in flat):
        return np.array([int(f) for f in flat], dtype=np.int64).reshape(arr.shape)
    out = np.empty(arr.shape, dtype=object)
    out.ravel()[:] = flat
    return out


def _is_integral(arr: np.ndarray) -> bool:
    return arr.dtype != object


def _matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    if m.dtype == object or v.dtype == object:
        return m.astype(object) @ v.astype(object)
    if m.size and v.size:
        bound = int(np.abs(m).max()) * int(np.abs(v).max()) * m.shape[1]
        if bound >= _INT_SAFE:
            return np.array(m.astype(object) @ v.astype(object), dtype=object)
    return m @ v


# -- MLP registry ---------------------------------------------------------------

MLP_REGISTRY: dict[str, Callable[[dict], Callable[[np.ndarray], np.ndarray]]] = {}


def register_mlp(name: str):
    """Register a factory ``params -> (vector -> vector)`` under `name`."""

    def deco(factory):
        MLP_REGISTRY[name] = factory
        return factory

    return deco


@register_mlp("identity")
def _identity(params):
    return lambda y: y


def resolve_mlp(ref: "MlpRef") -> Callable[[np.ndarray], np.ndarray]:
    if ref.name not in MLP_REGISTRY:
        # program families register their MLPs on import
        importlib.import_module("uhatcot.programs")
    try:
        factory = MLP_REGISTRY[ref.name]
    except KeyError:
        raise KeyError(f"no MLP registered under {ref.name!r}") from None
    return factory(ref.params)


# -- program ----------------------------------------------------------------------


@dataclass(frozen=True)
class MlpRef:
    name: str = "identity"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AttentionHead:
    key: np.ndarray
    query: np.ndarray
    value: np.ndarray

    def __post_init__(self):
        shapes = {self.key.shape, self.query.shape, self.value.shape}
        if len(shapes) != 1:
            raise ValueError(f"head maps disagree in shape: {shapes}")
        (shape,) = shapes
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError(f"head maps must be square, got {shape}")

    @property
    def width(self) -> int:
        return self.key.shape[0]


@dataclass(frozen=True)
class Layer:
    heads: tuple[AttentionHead, ...]
    mlp: MlpRef = MlpRef()


@dataclass(frozen=True, eq=False)
class UhatProgram:
    width: int
    layers: tuple[Layer, ...]
    embed: dict[str, np.ndarray]
    pos: np.ndarray  # row i-1 holds p_i
    out_map: np.ndarray
    out_alphabet: Alphabet
    tie_break: str = LEFTMOST
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = self.width
        if self.tie_break not in (LEFTMOST, RIGHTMOST):
            raise ValueError(f"tie_break must be leftmost or rightmost, got {self.tie_break!r}")
        for layer in self.layers:
            for head in layer.heads:
                if head.width != d:
                    raise ValueError(f"head width {head.width} != program width {d}")
        for label, vec in self.embed.items():
            if vec.shape != (d,):
                raise ValueError(f"embedding of {label!r} has shape {vec.shape}")
        if self.pos.ndim != 2 or self.pos.shape[1] != d:
            raise ValueError(f"positional table has shape {self.pos.shape}")
        if self.out_map.shape != (len(self.out_alphabet), d):
            raise ValueError(f"out_map shape {self.out_map.shape} != ({len(self.out_alphabet)}, {d})")

    @property
    def n_max(self) -> int:
        return self.pos.shape[0]

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def n_heads(self) -> int:
        return max((len(layer.heads) for layer in self.layers), default=0)

    @property
    def vocabulary(self) -> set[str]:
        return set(self.embed)

    @property
    def integral(self) -> bool:
        arrays = [self.pos, self.out_map, *self.embed.values()]
        for layer in self.layers:
            for h in layer.heads:
                arrays += [h.key, h.query, h.value]
        return all(_is_integral(a) for a in arrays)


def scaled(prog: UhatProgram, factor: int) -> UhatProgram:
    """Scale every argmax-feeding parameter (keys, queries, output map) by `factor`."""
    if factor <= 0:
        raise ValueError("factor must be positive")
    layers = tuple(
        replace(layer, heads=tuple(
            AttentionHead(h.key * factor, h.query * factor, h.value) for h in layer.heads))
        for layer in prog.layers
    )
    return replace(prog, layers=layers, out_map=prog.out_map * factor)


# -- execution ------------------------------------------------------------------------


@dataclass
class RunTranscript:
    tokens: list[str]
    activations: list[list[np.ndarray]]  # [layer 0..L][position]
    attended: list[list[tuple[int, ...]]]  # [position][layer] -> 1-based index per head
    outputs: list[np.ndarray]  # O . y_i^(L) per position

    def predicted(self, alphabet: Alphabet) -> list[str]:
        return [alphabet.symbols[_argmax_first(o)] for o in self.outputs]

    def write_csv(self, stream: IO[str]) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["position", "token", "layer", "head", "attended"])
        for i, per_layer in enumerate(self.attended, start=1):
            for k, heads in enumerate(per_layer, start=1):
                for h, j in enumerate(heads, start=1):
                    w.writerow([i, self.tokens[i - 1], k, h, j])


def _argmax_first(vec: np.ndarray) -> int:
    best = 0
    for idx in range(1, len(vec)):
        if vec[idx] > vec[best]:
            best = idx
    return best


def _select(scores: np.ndarray, tie_break: str) -> int:
    """0-based index of the hard-attention target."""
    if tie_break == LEFTMOST:
        return int(np.argmax(scores)) if scores.dtype != object else _argmax_first(scores)
    rev = scores[::-1]
    k = int(np.argmax(rev)) if scores.dtype != object else _argmax_first(rev)
    return len(scores) - 1 - k


class Runner:
    """Incremental causal forward pass; earlier positions are never recomputed."""

    def __init__(self, prog: UhatProgram):
        self.prog = prog
        self.mlps = [resolve_mlp(layer.mlp) for layer in prog.layers]
        self._integral = prog.integral
        dtype = np.int64 if self._integral else object
        n, d = prog.n_max, prog.width
        self._keys = [[np.zeros((n, d), dtype=dtype) for _ in layer.heads] for layer in prog.layers]
        self.transcript = RunTranscript([], [[] for _ in range(len(prog.layers) + 1)], [], [])

    def __len__(self) -> int:
        return len(self.transcript.tokens)

    def push(self, label: str) -> np.ndarray:
        """Append one token; return the output vector at its position."""
        prog, tr = self.prog, self.transcript
        i = len(tr.tokens) + 1
        if i > prog.n_max:
            raise ContextOverflow(f"position {i} exceeds context size {prog.n_max}")
        if label not in prog.embed:
            raise UnknownToken(f"token {label!r} not in program vocabulary")
        tr.tokens.append(label)
        y = prog.embed[label] + prog.pos[i - 1]
        tr.activations[0].append(y)
        picks: list[tuple[int, ...]] = []
        for k, layer in enumerate(prog.layers):
            prev = tr.activations[k]
            total = y.copy()
            chosen = []
            for h, head in enumerate(layer.heads):
                keys = self._keys[k][h]
                keys[i - 1] = _matvec(head.key, y)
                scores = _matvec(keys[:i], _matvec(head.query, y))
                j = _select(scores, prog.tie_break)
                chosen.append(j + 1)
                total = total + _matvec(head.value, prev[j])
            y = self._check(self.mlps[k](total), k)
            tr.activations[k + 1].append(y)
            picks.append(tuple(chosen))
        tr.attended.append(picks)
        out = _matvec(prog.out_map, y)
        tr.outputs.append(out)
        return out

    def _check(self, y, k: int) -> np.ndarray:
        y = np.asarray(y)
        if y.shape != (self.prog.width,):
            raise ValueError(f"MLP of layer {k + 1} returned shape {y.shape}")
        if self._integral and y.dtype == object:
            y = exact_array(y)
            if y.dtype == object:
                raise TypeError(f"MLP of layer {k + 1} produced non-integer activations in an integral program")
        return y

    def next_token(self) -> str:
        return self.prog.out_alphabet.symbols[_argmax_first(self.transcript.outputs[-1])]


def run(prog: UhatProgram, tokens: Iterable[str]) -> RunTranscript:
    r = Runner(prog)
    for t in tokens:
        r.push(t)
    return r.transcript


def attention_scores(prog: UhatProgram, transcript: RunTranscript, layer: int, head: int, i: int) -> np.ndarray:
    """Scores a_{i,1..i} of (1-based) `layer`/`head` at query position `i`."""
    acts = transcript.activations[layer - 1]
    if i > len(acts):
        raise IndexError(f"no activations for position {i}")
    h = prog.layers[layer - 1].heads[head - 1]
    if acts[i - 1].shape != (h.width,):
        raise ValueError("dimension mismatch between activations and head")
    q = _matvec(h.query, acts[i - 1])
    return np.array([_matvec(h.key, acts[j]) @ q for j in range(i)],
                    dtype=object if q.dtype == object else np.int64)


def step(prog: UhatProgram, tokens: Sequence[str]) -> tuple[str, RunTranscript]:
    if not tokens:
        raise ValueError("step needs at least one token")
    r = Runner(prog)
    for t in tokens:
        r.push(t)
    return r.next_token(), r.transcript


def decode(prog: UhatProgram, trace: TokenTrace | Sequence[str], stop: Iterable[str] | None = None,
           max_steps: int | None = None) -> tuple[TokenTrace, RunTranscript]:
    """Append predictions until a stop token is emitted or `max_steps` is reached.

    With `stop` given, running out of steps raises DecodeError.
    """
    tokens = list(trace.tokens if isinstance(trace, TokenTrace) else trace)
    input_len = trace.input_len if isinstance(trace, TokenTrace) else len(tokens)
    stop = set(stop or ())
    if not stop and max_steps is None:
        raise ValueError("decode needs a stop token set or max_steps")
    budget = max_steps if max_steps is not None else prog.n_max - len(tokens)
    r = Runner(prog)
    for t in tokens:
        r.push(t)
    emitted = 0
    while True:
        nxt = r.next_token()
        tokens.append(nxt)
        emitted += 1
        if nxt in stop:
            break
        if emitted >= budget:
            if stop:
                raise DecodeError(f"no stop token {sorted(stop)} after {emitted} steps")
            break
        r.push(nxt)
    return TokenTrace(tuple(tokens), input_len), r.transcript


@dataclass(frozen=True)
class OneHotReport:
    ok: bool
    position: int | None = None
    vector: tuple | None = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def check_one_hot_output(prog: UhatProgram, trace: TokenTrace) -> OneHotReport:
    """Check outputs at positions |x|..|xg(x)|-1 are exactly one-hot at the next token."""
    if trace.input_len < 1:
        return OneHotReport(False, None, None, "trace has no input prefix")
    r = Runner(prog)
    for i, tok in enumerate(trace.tokens[:-1], start=1):
        out = r.push(tok)
        if i < trace.input_len:
            continue
        vals = [Fraction(v) for v in out]
        ones = [k for k, v in enumerate(vals) if v == 1]
        if len(ones) != 1 or any(v != 0 for k, v in enumerate(vals) if k != ones[0]):
            return OneHotReport(False, i, tuple(vals), "output is not one-hot")
        want = trace.tokens[i]
        got = prog.out_alphabet.symbols[ones[0]]
        if got != want:
            return OneHotReport(False, i, tuple(vals), f"one-hot at {got!r}, trace has {want!r}")
    return OneHotReport(True)


# -- serialization -------------------------------------------------------------------


def _enc(arr: np.ndarray):
    return [str(Fraction(v)) for v in arr.ravel()] if arr.ndim == 1 else [_enc(row) for row in arr]


def _dec(rows, shape=None) -> np.ndarray:
    arr = np.array(rows, dtype=object)
    return exact_array(arr if shape is None else arr.reshape(shape))


def program_to_dict(prog: UhatProgram) -> dict:
    return {
        "format": "uhat-program/1",
        "name": prog.name,
        "width": prog.width,
        "n_layers": prog.n_layers,
        "n_heads": prog.n_heads,
        "tie_break": prog.tie_break,
        "n_max": prog.n_max,
        "out_alphabet": list(prog.out_alphabet.symbols),
        "out_map": _enc(prog.out_map),
        "embed": {k: _enc(v) for k, v in prog.embed.items()},
        "pos": _enc(prog.pos),
        "layers": [
            {
                "mlp": {"name": layer.mlp.name, "params": layer.mlp.params},
                "heads": [{"key": _enc(h.key), "query": _enc(h.query), "value": _enc(h.value)}
                          for h in layer.heads],
            }
            for layer in prog.layers
        ],
        "meta": prog.meta,
    }


def program_from_dict(d: dict) -> UhatProgram:
    width = d["width"]
    layers = tuple(
        Layer(
            heads=tuple(
                AttentionHead(_dec(h["key"], (width, width)), _dec(h["query"], (width, width)),
                              _dec(h["value"], (width, width)))
                for h in layer["heads"]
            ),
            mlp=MlpRef(layer["mlp"]["name"], layer["mlp"].get("params", {})),
        )
        for layer in d["layers"]
    )
    return UhatProgram(
        width=width,
        layers=layers,
        embed={k: _dec(v, (width,)) for k, v in d["embed"].items()},
        pos=_dec(d["pos"], (d["n_max"], width)),
        out_map=_dec(d["out_map"], (len(d["out_alphabet"]), width)),
        out_alphabet=Alphabet(tuple(d["out_alphabet"])),
        tie_break=d.get("tie_break", LEFTMOST),
        name=d.get("name", ""),
        meta=d.get("meta", {}),
    )


def dump_program(prog: UhatProgram, stream: IO[str]) -> None:
    json.dump(program_to_dict(prog), stream)


def load_program(stream: IO[str]) -> UhatProgram:
    return program_from_dict(json.load(stream))
