"""Single-tape Turing machines: direct simulation and compilation to a UHAT CoT.

The CoT token of each transition is the composite label ``"i|a|q"``: tape
position after the action, the action, and the new state.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..core import Alphabet
from ..vm import AttentionHead, Layer, MlpRef, UhatProgram, register_mlp
from .layout import Layout, one_hot_index

LEFT = "LEFT"
RIGHT = "RIGHT"


def write(symbol: str) -> str:
    return f"WRITE({symbol})"


def written_symbol(action: str) -> str | None:
    if action.startswith("WRITE(") and action.endswith(")"):
        return action[6:-1]
    return None


class StepBoundExceeded(RuntimeError):
    pass


class HeadUnderflow(RuntimeError):
    pass


@dataclass(frozen=True)
class TuringMachine:
    alphabet: tuple[str, ...]
    states: tuple[str, ...]
    delta: dict  # (symbol, state) -> (action, state)
    start: str
    terminating: frozenset
    answers: dict = field(default_factory=dict)  # terminating state -> answer label
    blank: str = "_"
    separator: str = "#"

    def __post_init__(self):
        object.__setattr__(self, "terminating", frozenset(self.terminating))
        if not self.terminating:
            raise ValueError("terminating set must be nonempty")
        for s in (self.blank, self.separator):
            if s not in self.alphabet:
                raise ValueError(f"alphabet lacks {s!r}")
        if any("|" in s for s in self.alphabet + self.states):
            raise ValueError("symbols and states may not contain '|'")
        if self.start not in self.states or not self.terminating <= set(self.states):
            raise ValueError("start/terminating states must be declared states")
        for q in self.states:
            if q in self.terminating:
                continue
            for s in self.alphabet:
                if (s, q) not in self.delta:
                    raise ValueError(f"transition missing for state {q!r} on {s!r}")
        for (s, q), (a, q2) in self.delta.items():
            if q2 not in self.states:
                raise ValueError(f"unknown target state {q2!r}")
            if a not in self.actions:
                raise ValueError(f"unknown action {a!r}")

    @property
    def actions(self) -> tuple[str, ...]:
        return (LEFT, RIGHT) + tuple(write(s) for s in self.alphabet)

    @property
    def input_symbols(self) -> tuple[str, ...]:
        return tuple(s for s in self.alphabet if s not in (self.blank, self.separator))

    def answer(self, state: str) -> str:
        return self.answers.get(state, state)

    def to_spec(self) -> str:
        lines = [
            "alphabet: " + " ".join(self.alphabet),
            f"blank: {self.blank}",
            f"separator: {self.separator}",
            "states: " + " ".join(self.states),
            f"start: {self.start}",
            "terminating: " + " ".join(q for q in self.states if q in self.terminating),
        ]
        lines += [f"answer {q}: {a}" for q, a in sorted(self.answers.items())]
        for q in self.states:
            for s in self.alphabet:
                if (s, q) in self.delta:
                    a, q2 = self.delta[s, q]
                    lines.append(f"{q} {s} -> {a} {q2}")
        return "\n".join(lines) + "\n"


def parse_tm_spec(text: str) -> TuringMachine:
    """Parse the line-oriented TM format (see TuringMachine.to_spec)."""
    fields: dict[str, str] = {}
    answers: dict[str, str] = {}
    delta: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if raw.lstrip().startswith("#") else raw.strip()
        if not line:
            continue
        if "->" in line:
            lhs, rhs = (p.split() for p in line.split("->", 1))
            if len(lhs) != 2 or len(rhs) != 2:
                raise ValueError(f"line {lineno}: expected 'state symbol -> action state'")
            delta[lhs[1], lhs[0]] = (rhs[0], rhs[1])
        elif line.startswith("answer "):
            head, _, value = line.partition(":")
            answers[head.split()[1]] = value.strip()
        elif ":" in line:
            key, _, value = line.partition(":")
            fields[key.strip()] = value.strip()
        else:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
    try:
        return TuringMachine(
            alphabet=tuple(fields["alphabet"].split()),
            states=tuple(fields["states"].split()),
            delta=delta,
            start=fields["start"],
            terminating=frozenset(fields["terminating"].split()),
            answers=answers,
            blank=fields.get("blank", "_"),
            separator=fields.get("separator", "#"),
        )
    except KeyError as e:
        raise ValueError(f"TM spec lacks declaration {e.args[0]!r}") from None


# -- fixtures --------------------------------------------------------------------------


def parity_tm() -> TuringMachine:
    """Scan right, toggling between even/odd; halt on the separator."""
    delta = {}
    for q in ("even", "odd"):
        other = "odd" if q == "even" else "even"
        delta["0", q] = (RIGHT, q)
        delta["1", q] = (RIGHT, other)
        delta["#", q] = (RIGHT, f"halt_{q}")
        delta["_", q] = (RIGHT, f"halt_{q}")
    return TuringMachine(
        alphabet=("0", "1", "#", "_"),
        states=("even", "odd", "halt_even", "halt_odd"),
        delta=delta,
        start="even",
        terminating={"halt_even", "halt_odd"},
        answers={"halt_even": "0", "halt_odd": "1"},
    )


def unary_increment_tm() -> TuringMachine:
    """Append one '1' to a unary word and move the separator one cell right."""
    delta = {
        ("1", "scan"): (RIGHT, "scan"),
        ("#", "scan"): (write("1"), "wrote"),
        ("_", "scan"): (RIGHT, "reject"),
        ("1", "wrote"): (RIGHT, "place"),
        ("#", "wrote"): (RIGHT, "reject"),
        ("_", "wrote"): (RIGHT, "reject"),
        ("_", "place"): (write("#"), "done"),
        ("1", "place"): (RIGHT, "reject"),
        ("#", "place"): (RIGHT, "reject"),
    }
    return TuringMachine(
        alphabet=("1", "#", "_"),
        states=("scan", "wrote", "place", "done", "reject"),
        delta=delta,
        start="scan",
        terminating={"done", "reject"},
        answers={"done": "1", "reject": "0"},
    )


def halting_tm() -> TuringMachine:
    """Start state is terminating: no transitions happen."""
    return TuringMachine(
        alphabet=("0", "1", "#", "_"),
        states=("stop",),
        delta={},
        start="stop",
        terminating={"stop"},
        answers={"stop": "1"},
    )


FIXTURES = {"parity": parity_tm, "unary_increment": unary_increment_tm, "halting": halting_tm}


# -- simulation ------------------------------------------------------------------------


@dataclass
class TmConfiguration:
    tape: dict
    head: int
    state: str
    steps: int = 0


@dataclass(frozen=True)
class SimResult:
    answer: str
    final_state: str
    steps: tuple[tuple[int, str, str], ...]
    tape: tuple[str, ...]

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(step_label(*s) for s in self.steps)


def step_label(pos: int, action: str, state: str) -> str:
    return f"{pos}|{action}|{state}"


def parse_step_label(label: str) -> tuple[int, str, str]:
    i, a, q = label.split("|")
    return int(i), a, q


def tm_simulate(tm: TuringMachine, word, max_steps: int) -> SimResult:
    """Run `tm` on `word` (separator appended) for at most `max_steps` transitions."""
    word = list(word.split() if isinstance(word, str) else word)
    bad = [s for s in word if s not in tm.input_symbols]
    if bad:
        raise ValueError(f"input symbols {bad} not in the input alphabet")
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    cfg = TmConfiguration({i: s for i, s in enumerate(word + [tm.separator])}, 0, tm.start)
    steps = []
    while cfg.state not in tm.terminating:
        if cfg.steps >= max_steps:
            raise StepBoundExceeded(f"no termination within {max_steps} steps")
        action, nxt = tm.delta[cfg.tape.get(cfg.head, tm.blank), cfg.state]
        if action == LEFT:
            if cfg.head == 0:
                raise HeadUnderflow("head moved left of position 0")
            cfg.head -= 1
        elif action == RIGHT:
            cfg.head += 1
        else:
            cfg.tape[cfg.head] = written_symbol(action)
        cfg.state = nxt
        cfg.steps += 1
        steps.append((cfg.head, action, nxt))
    top = max(cfg.tape) if cfg.tape else -1
    tape = tuple(cfg.tape.get(i, tm.blank) for i in range(top + 1))
    return SimResult(tm.answer(cfg.state), cfg.state, tuple(steps), tape)


def step_bound(tm: TuringMachine, n: int, limit: int = 1 << 16, max_steps: int = 10_000) -> int:
    """Largest step count over all words of length <= n (exhaustive)."""
    syms = tm.input_symbols
    total = sum(len(syms) ** k for k in range(n + 1))
    if total > limit:
        raise ValueError(f"{total} words up to length {n}; pass max_steps explicitly")
    worst = 0
    for k in range(n + 1):
        for word in itertools.product(syms, repeat=k):
            worst = max(worst, len(tm_simulate(tm, word, max_steps).steps))
    return worst


# -- compilation ------------------------------------------------------------------------


def _tables(tm: TuringMachine, tape_len: int):
    image = sorted({v for v in tm.delta.values()}, key=lambda v: (tm.actions.index(v[0]), tm.states.index(v[1])))
    triples = [step_label(i, a, q) for i in range(tape_len) for a, q in image]
    answers = []
    for q in tm.states:
        if q in tm.terminating and tm.answer(q) not in answers:
            answers.append(tm.answer(q))
    return triples, answers


def _tm_layout(tm: TuringMachine, tape_len: int, n_out: int) -> Layout:
    lay = Layout()
    lay.add("one").add("istape").add("isstep")
    lay.add("sym", len(tm.alphabet))
    lay.add("cur_pos", tape_len).add("cur_state", len(tm.states))
    lay.add("is_write").add("act", len(tm.actions))
    lay.add("seq").add("negseq2").add("tapeq").add("penalty")
    lay.add("h1_pos", tape_len).add("h1_act", len(tm.actions))
    lay.add("h2_seq").add("h2_sym", len(tm.alphabet)).add("h2_valid")
    lay.add("out", n_out)
    return lay


def tm_compile(tm: TuringMachine, n: int, max_steps: int | None = None) -> UhatProgram:
    """One layer, two heads; decodes the same step tokens as tm_simulate.

    Head 1 finds the most recent WRITE at the current tape position: keys
    carry (e_{i'}, write indicator, sequence position), the query is
    (3M e_i, 2M, 1) with M the context size, so a matching write beats any
    matching non-write, which beats anything else, and recency breaks ties.
    Head 2 reads the original input cell: score 2tj - j^2 peaks at sequence
    position t = i + 1, and non-input tokens carry a penalty larger than any
    t^2.  The MLP combines both lookups, applies the transition and emits
    the next step token (or the answer once a terminating state is reached).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    tau = step_bound(tm, n) if max_steps is None else max_steps
    tape_len = n + 1 + tau + 1
    triples, answers = _tables(tm, tape_len)
    out_alpha = triples + answers
    lay = _tm_layout(tm, tape_len, len(out_alpha))
    d = lay.width
    n_max = (n + 1) + tau + 1
    big = (tape_len + 1) ** 2
    m = n_max + 1

    def token_vec(label):
        e = lay.zeros()
        e[lay.at("one")] = 1
        return e

    embed = {}
    for s in tm.alphabet:
        e = token_vec(s)
        e[lay.at("istape")] = 1
        e[lay.at("sym", tm.alphabet.index(s))] = 1
        embed[s] = e
    sep = embed[tm.separator]
    sep[lay.at("isstep")] = 1
    sep[lay.at("cur_pos", 0)] = 1
    sep[lay.at("cur_state", tm.states.index(tm.start))] = 1
    sep[lay.at("tapeq")] = 1
    for label in triples:
        i, a, q = parse_step_label(label)
        e = token_vec(label)
        e[lay.at("isstep")] = 1
        e[lay.at("cur_pos", i)] = 1
        e[lay.at("cur_state", tm.states.index(q))] = 1
        e[lay.at("act", tm.actions.index(a))] = 1
        e[lay.at("is_write")] = int(written_symbol(a) is not None)
        e[lay.at("tapeq")] = i + 1
        e[lay.at("penalty")] = -1
        embed[label] = e
    for label in answers:
        if label not in embed:
            e = token_vec(label)
            e[lay.at("penalty")] = -1
            embed[label] = e

    pos = np.zeros((n_max, d), dtype=np.int64)
    for j in range(1, n_max + 1):
        pos[j - 1, lay.at("seq")] = j
        pos[j - 1, lay.at("negseq2")] = -j * j

    k1, q1, v1 = lay.matrix(), lay.matrix(), lay.matrix()
    for r in range(tape_len):
        k1[lay.at("cur_pos", r), lay.at("cur_pos", r)] = 1
        q1[lay.at("cur_pos", r), lay.at("cur_pos", r)] = 3 * m
        v1[lay.at("h1_pos", r), lay.at("cur_pos", r)] = 1
    k1[lay.at("is_write"), lay.at("is_write")] = 1
    q1[lay.at("is_write"), lay.at("one")] = 2 * m
    k1[lay.at("seq"), lay.at("seq")] = 1
    q1[lay.at("seq"), lay.at("one")] = 1
    for r in range(len(tm.actions)):
        v1[lay.at("h1_act", r), lay.at("act", r)] = 1

    k2, q2, v2 = lay.matrix(), lay.matrix(), lay.matrix()
    k2[lay.at("seq"), lay.at("seq")] = 2
    q2[lay.at("seq"), lay.at("tapeq")] = 1
    k2[lay.at("negseq2"), lay.at("negseq2")] = 1
    q2[lay.at("negseq2"), lay.at("one")] = 1
    k2[lay.at("penalty"), lay.at("penalty")] = 1
    q2[lay.at("penalty"), lay.at("one")] = big
    v2[lay.at("h2_seq"), lay.at("seq")] = 1
    v2[lay.at("h2_valid"), lay.at("istape")] = 1
    for r in range(len(tm.alphabet)):
        v2[lay.at("h2_sym", r), lay.at("sym", r)] = 1

    out = np.zeros((len(out_alpha), d), dtype=np.int64)
    for r in range(len(out_alpha)):
        out[r, lay.at("out", r)] = 1

    params = {"tm": tm.to_spec(), "tape_len": tape_len, "layout": lay.to_params()}
    return UhatProgram(
        width=d,
        layers=(Layer((AttentionHead(k1, q1, v1), AttentionHead(k2, q2, v2)), MlpRef("tm_step", params)),),
        embed=embed,
        pos=pos,
        out_map=out,
        out_alphabet=Alphabet(tuple(out_alpha)),
        name=f"tm_compile[{n}]",
        meta={"family": "tm_compile", "n": n, "max_steps": tau, "answers": answers,
              "query_weights": [3 * m, 2 * m, 1]},
    )


@register_mlp("tm_step")
def _tm_step(params):
    tm = parse_tm_spec(params["tm"])
    tape_len = params["tape_len"]
    lay = Layout.from_params(params["layout"])
    triples, answers = _tables(tm, tape_len)
    index = {label: r for r, label in enumerate(triples + answers)}

    def f(y):
        y = y.copy()
        if not y[lay.at("isstep")]:
            return y
        i = one_hot_index(y[lay["cur_pos"]])
        q = tm.states[one_hot_index(y[lay["cur_state"]])]
        if q in tm.terminating:
            y[lay.at("out", index[tm.answer(q)])] = 1
            return y
        symbol = tm.blank
        p1, a1 = one_hot_index(y[lay["h1_pos"]]), one_hot_index(y[lay["h1_act"]])
        w = written_symbol(tm.actions[a1]) if a1 is not None else None
        if p1 == i and w is not None:
            symbol = w
        elif y[lay.at("h2_valid")] == 1 and y[lay.at("h2_seq")] == i + 1:
            symbol = tm.alphabet[one_hot_index(y[lay["h2_sym"]])]
        action, nxt = tm.delta[symbol, q]
        if action == LEFT:
            i -= 1
        elif action == RIGHT:
            i += 1
        label = step_label(i, action, nxt)
        if i >= 0 and label in index:
            y[lay.at("out", index[label])] = 1
        return y

    return f


def tm_input(tm: TuringMachine, word) -> list[str]:
    word = list(word.split() if isinstance(word, str) else word)
    return word + [tm.separator]
