"""Acceptance checks 1-11.

Each check returns (ok, detail).  Under pytest every check is one test and
conftest prints a PASS/FAIL line per criterion in the terminal summary;
`python tests/test_acceptance.py` prints the same lines directly.
"""

from __future__ import annotations

import io
import itertools
import math
import time
from contextlib import redirect_stdout
from fractions import Fraction

import pytest

from uhatcot import boolean_lab as B
from uhatcot import programs as P
from uhatcot import tasks as T
from uhatcot.cli import fit_constant, length_model, main
from uhatcot.core import rng
from uhatcot.datagen import (
    chain_dag, gen_dag_from, gen_median_corpus, gen_mult_corpus, gen_parity_corpus,
    gen_reach_corpus, sample_query_from,
)
from uhatcot.vm import decode

RESULTS: dict[int, tuple[bool, str]] = {}


def _cli(*argv) -> tuple[int, str]:
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(list(argv))
    return code, buf.getvalue()


def _bits(v: int, n: int) -> list[str]:
    return [str((v >> (n - 1 - i)) & 1) for i in range(n)]


# -- 1 ---------------------------------------------------------------------------------------

NTT_TARGET = ("-1 0 1 0 0 -1 1 1 0 0 -1 1 2 4 3 -1 2 3 0 4 -1 a 1 b 2 c 4 d 3 -1 a 2 b 3 c 0 d 4 "
              "-1 a 2 b 1 c 0 d 2 -1 2 1 0 2 -1 0 1 1 0 -1 0 1 1 0 -1")


def criterion_1():
    t0 = time.perf_counter()
    code, out = _cli("gen-cot", "mult", "--x", "10", "--y", "11", "--mode", "compact", "--cot-only")
    dt = time.perf_counter() - t0
    got = out.strip()
    pl = T.ntt_params(2)
    ok = code == 0 and got == NTT_TARGET and (pl.p, pl.omega) == (5, 2) and dt < 1.0
    return ok, f"{len(got.split())} tokens, exact={got == NTT_TARGET}, p={pl.p}, {dt:.2f}s"


# -- 2 ---------------------------------------------------------------------------------------

MEDIAN_TARGET = "BOS 3 4 3 ; 0 1 9 ; 8 5 2 ; SEP 0 1 9 ; 3 4 3 ; EOS"


def criterion_2():
    t0 = time.perf_counter()
    code, out = _cli("gen-cot", "median", "--numbers", "343 19 852")
    dt = time.perf_counter() - t0
    ok = code == 0 and out.strip() == MEDIAN_TARGET and dt < 1.0
    return ok, f"got {out.strip()!r}, {dt:.2f}s"


# -- 3 ---------------------------------------------------------------------------------------


def criterion_3():
    t0 = time.perf_counter()
    bad_as = [n for n in range(1, 17) if B.avg_sensitivity_exact(B.parity(n)) != Fraction(n)]
    bad_len = []
    for n in range(1, 501):
        x = tuple(int(b) for b in rng(3, n).integers(0, 2, size=n))
        trace = T.parity_cot(x, 1)
        if T.cot_length(trace) != n + 1 or trace.cot[-1] != str(T.parity_oracle(x)):
            bad_len.append(n)
    dt = time.perf_counter() - t0
    ok = not bad_as and not bad_len and dt < 10
    return ok, f"as mismatches {bad_as}, length mismatches {bad_len[:5]}, {dt:.1f}s"


# -- 4 ---------------------------------------------------------------------------------------


def criterion_4():
    t0 = time.perf_counter()
    fails = []
    for n in range(1, 13):
        prog = P.and_head(n)
        for v in range(2 ** n):
            x = _bits(v, n)
            trace, _ = decode(prog, x, max_steps=1)
            if trace.cot != (str(int(all(b == "1" for b in x))),):
                fails.append(("and", n, v))
    for n in range(1, 9):
        prog = P.parity_dot_by_dot(n)
        for v in range(2 ** n):
            x = _bits(v, n)
            trace, _ = decode(prog, x, stop={"0", "1"})
            want = P.dot_by_dot_cot(n) + (str(x.count("1") % 2),)
            if trace.cot != want or len(trace.cot) != 2 ** n + 2:
                fails.append(("dot", n, v))
    tm = P.parity_tm()
    for n in range(1, 9):
        prog = P.tm_compile(tm, n)
        stop = set(prog.meta["answers"])
        for v in range(2 ** n):
            x = _bits(v, n)
            sim = P.tm_simulate(tm, x, 10_000)
            trace, _ = decode(prog, P.tm_input(tm, x), stop=stop)
            if trace.cot != sim.tokens + (sim.answer,):
                fails.append(("tm", n, v))
    dt = time.perf_counter() - t0
    return not fails and dt < 300, f"{len(fails)} mismatches {fails[:3]}, {dt:.1f}s"


# -- 5 ---------------------------------------------------------------------------------------


def _spread(lengths, models):
    ratios = [a / b for a, b in zip(lengths, models)]
    c = fit_constant(ratios)
    return c, min(ratios) / c, max(ratios) / c


def criterion_5():
    t0 = time.perf_counter()
    report, ok = [], True
    for mode, ns in ((T.SCHOOLBOOK, range(8, 65, 8)), (T.BUTTERFLIES, range(8, 129, 8))):
        lengths, models = [], []
        for n in ns:
            for i in range(3):
                inst = T.TASKS["mult"].sample(rng(5, n, i), n)
                lengths.append(len(T.mult_cot(inst, mode).cot))
                models.append(length_model("mult", n, {"mode": mode}))
        c, lo, hi = _spread(lengths, models)
        ok &= 0.5 <= lo and hi <= 2.0
        report.append(f"{mode} c={c:.2f} [{lo:.2f}, {hi:.2f}]")
    lengths, models = [], []
    for i in range(1000):
        g = rng(55, i)
        v = int(g.integers(5, 36))
        inst = T.TASKS["reach"].sample(g, v, mode=T.BINARY)
        lengths.append(len(T.reach_cot_bfs(inst).cot))
        models.append(length_model("reach", v, {}, len(inst.edges)))
    c, lo, hi = _spread(lengths, models)
    ok &= 0.5 <= lo and hi <= 2.0
    report.append(f"reach c={c:.2f} [{lo:.2f}, {hi:.2f}]")
    dt = time.perf_counter() - t0
    return ok and dt < 120, "; ".join(report) + f", {dt:.1f}s"


# -- 6 ---------------------------------------------------------------------------------------


def criterion_6():
    t0 = time.perf_counter()
    n = 8
    rows = B.mult_digit_sensitivity(n, sampled=False)
    vals = {k: v for k, v, _ in rows}
    peak = max(vals, key=vals.get)
    off = {k: vals[k] / min(k, 2 * n - k) - 1 for k in range(3, 14)}
    outside = sorted(k for k, e in off.items() if abs(e) > 0.25)
    dt = time.perf_counter() - t0
    ok = peak in (7, 8, 9) and not outside and dt < 120
    worst = max(off.values(), key=abs)
    return ok, f"argmax k={peak}, outside +-25% at k={outside}, worst {worst:+.0%}, {dt:.1f}s"


# -- 7 ---------------------------------------------------------------------------------------


def criterion_7():
    t0 = time.perf_counter()
    ns = [8, 16, 32, 64]
    est = {n: B.median_lastdigit_sensitivity(n, n_inputs=200, n_flips=200, seed=7) for n in ns}
    slope, _ = B.linear_fit(ns, [est[n].value for n in ns])
    dt = time.perf_counter() - t0
    ok = slope >= 0.3 and est[32].value >= 0.4 * 32 and dt < 120
    vals = ", ".join(f"N={n}: {est[n].value:.2f}" for n in ns)
    return ok, f"slope {slope:.3f}; {vals}; {dt:.1f}s"


# -- 8 ---------------------------------------------------------------------------------------


def criterion_8():
    t0 = time.perf_counter()
    rows = B.fourier_scan(12, range(2, 11), combos=100, samples=100_000, seed=8)
    best = B.max_abs_by_t(rows)
    ts = sorted(best)
    violations = []
    for t, u in itertools.combinations(ts, 2):
        (a, sa), (b, sb) = best[t], best[u]
        if b > a + 4 * math.hypot(sa, sb):
            violations.append((t, u))
    exact = B.fourier_exact(B.FourierQuery(1, 1, {1}, {1}, set()))
    dt = time.perf_counter() - t0
    ok = not violations and exact == Fraction(1, 2) and dt < 600
    maxima = " ".join(f"{best[t][0]:.3f}" for t in ts)
    return ok, f"maxima T=2..10: {maxima}; violations {violations}; N=1 exact {exact}; {dt:.1f}s"


# -- 9 ---------------------------------------------------------------------------------------


def criterion_9():
    t0 = time.perf_counter()
    bad = []
    for n in range(1, 17):
        r = B.restriction_search(B.and_(n), (n - 1) / n)
        if r.rho is None or r.rho.star_fraction() < (n - 1) / n or not B.is_constant_on(B.and_(n), r.rho):
            bad.append(("and", n))
    for n in range(1, 11):
        r = B.restriction_search(B.parity(n), 1 / n)
        if r.rho is not None or r.max_stars != 0 or not r.exhaustive:
            bad.append(("parity", n))
    dt = time.perf_counter() - t0
    return not bad and dt < 60, f"failures {bad}, {dt:.1f}s"


# -- 10 --------------------------------------------------------------------------------------


def criterion_10():
    t0 = time.perf_counter()
    bad = []
    for i in range(1000):
        g = rng(10, i)
        v = int(g.integers(5, 36))
        inst = T.TASKS["reach"].sample(g, v)
        trace = T.reach_cot_bfs(inst)
        verdict = T.reach_verify(inst, trace)
        if not verdict or trace.cot[-1] != str(T.reach_dfs(inst)):
            bad.append(i)
    chain = chain_dag(3)
    draws = 100_000
    g = rng(1010)
    counts: dict[tuple[int, int], int] = {}
    for _ in range(draws):
        pair, _, _ = sample_query_from(g, chain)
        counts[pair] = counts.get(pair, 0) + 1
    # chain 2 -> 1 -> 0: reachable pairs have source > target
    expected = {(0, 1): 1 / 6, (0, 2): 1 / 6, (1, 2): 1 / 6,
                (2, 1): 1 / 8, (1, 0): 1 / 8, (2, 0): 1 / 4}
    off = {}
    for pair, p in expected.items():
        sigma = math.sqrt(draws * p * (1 - p))
        off[pair] = (counts.get(pair, 0) - draws * p) / sigma
    freq_ok = set(counts) == set(expected) and all(abs(z) <= 3 for z in off.values())
    dt = time.perf_counter() - t0
    worst = max(abs(z) for z in off.values())
    return not bad and freq_ok and dt < 120, f"{len(bad)} bad DAGs, worst pair |z|={worst:.2f}, {dt:.1f}s"


# -- 11 --------------------------------------------------------------------------------------


def criterion_11(tmp_path_factory=None):
    import tempfile
    from pathlib import Path

    t0 = time.perf_counter()
    builders = [
        lambda: gen_parity_corpus(12, 60, seed=11),
        lambda: gen_mult_corpus(4, seed=11, train=50, test=10, mode=T.COMPACT),
        lambda: gen_median_corpus(5, 80, seed=11, stride=2),
        lambda: gen_reach_corpus(9, 60, seed=11),
    ]
    mismatched = []
    with tempfile.TemporaryDirectory() as tmp:
        for j, build in enumerate(builders):
            files = []
            for rep in range(2):
                out = Path(tmp) / f"{j}-{rep}"
                build().write(out)
                files.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
            if files[0] != files[1]:
                mismatched.append(j)
        traces = []
        for rep in range(2):
            out = Path(tmp) / f"trace{rep}.csv"
            code, _ = _cli("vm-run", "--builtin", "tm:parity", "--n", "5", "--input", "1 1 0 1 0",
                           "--transcript", str(out))
            traces.append((code, out.read_bytes()))
        cli_runs = [_cli("gen-cot", "reach", "--n", "12", "--seed", "99") for _ in range(2)]
    same_trace = traces[0] == traces[1] and traces[0][0] == 0
    same_cli = cli_runs[0] == cli_runs[1]
    dt = time.perf_counter() - t0
    ok = not mismatched and same_trace and same_cli and dt < 60
    return ok, f"corpus mismatches {mismatched}, transcript equal {same_trace}, cli equal {same_cli}, {dt:.1f}s"


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, detail = CRITERIA[number]()
    RESULTS[number] = (ok, detail)
    assert ok, detail


if __name__ == "__main__":
    for i, fn in CRITERIA.items():
        ok, detail = fn()
        print(f"criterion {i:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
