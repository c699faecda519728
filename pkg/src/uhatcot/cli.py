"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

from . import tasks as T
from .core import CorpusRecord, TokenTrace, bits_from_str, csv_text, rng, write_jsonl
from .vm import ContextOverflow, DecodeError, decode, dump_program, load_program

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ResourceCap(Exception):
    pass


# -- output ---------------------------------------------------------------------------


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with p.open("w") as fh:
            yield fh


def _emit_table(args, header, rows):
    with _sink(args.out) as fh:
        if args.format == "jsonl":
            for row in rows:
                fh.write(json.dumps(dict(zip(header, row)), sort_keys=True) + "\n")
        elif args.format == "text":
            fh.write("\t".join(header) + "\n")
            for row in rows:
                fh.write("\t".join(_txt(v) for v in row) + "\n")
        else:
            fh.write(csv_text(header, rows))


def _txt(v):
    return repr(v) if isinstance(v, float) else str(v)


def _plot(args, fn, *a, **kw):
    if args.plot:
        from . import plotting

        getattr(plotting, fn)(*a, path=args.plot, **kw)


# -- task instances from flags ------------------------------------------------------------


def _task_opts(args) -> dict:
    opts = {}
    if args.task in ("parity", "median"):
        opts["stride"] = args.stride
    if args.task == "mult":
        opts["mode"] = args.mode
    return opts


def _instance_from_flags(args):
    task = args.task
    if task == "parity" and args.input:
        x = bits_from_str(args.input)
        if args.n is not None and args.n != len(x):
            raise UsageError(f"--n {args.n} does not match input length {len(x)}")
        return T.ParityInstance(x)
    if task == "dfa" and args.input:
        return T.DfaInstance(T.parity_dfa(), tuple(args.input.split() if " " in args.input else args.input))
    if task == "mult" and (args.x or args.y):
        if not (args.x and args.y):
            raise UsageError("mult needs both --x and --y")
        x, y = bits_from_str(args.x), bits_from_str(args.y)
        if len(x) != len(y):
            raise UsageError("--x and --y must have equal length")
        return T.MultiplicationInstance(x, y)
    if task == "median" and args.numbers:
        nums = tuple(int(v) for v in args.numbers.replace(",", " ").split())
        return T.MedianInstance(nums, args.digits, args.base)
    if task == "reach" and args.edges is not None:
        if args.query is None or args.vertices is None:
            raise UsageError("reach needs --vertices, --edges and --query")
        edges = []
        for item in args.edges.replace(",", " ").split():
            u, _, v = item.partition("-")
            edges.append((int(u), int(v)))
        s, _, t = args.query.partition(",")
        return T.ReachabilityInstance(args.vertices, tuple(edges), (int(s), int(t)), args.reach_mode)
    return None


def _sample_opts(args) -> dict:
    if args.task == "median":
        return {"digits": args.digits, "base": args.base}
    if args.task == "reach":
        return {"edge_prob": args.edge_prob, "mode": args.reach_mode}
    return {}


def _instances(args):
    inst = _instance_from_flags(args)
    if inst is not None:
        return [inst]
    if args.n is None:
        raise UsageError("give an explicit input or --n to sample instances")
    task = T.get_task(args.task)
    return [task.sample(rng(args.seed, i), args.n, **_sample_opts(args)) for i in range(args.count)]


# -- subcommands ---------------------------------------------------------------------------


def cmd_gen_cot(args) -> int:
    task = T.get_task(args.task)
    opts = _task_opts(args)
    records = []
    for inst in _instances(args):
        trace = task.generate(inst, **opts)
        records.append((trace, CorpusRecord.from_trace(args.task, trace, task.answer(inst), task.meta(inst, **opts))))
    with _sink(args.out) as fh:
        if args.format == "jsonl":
            write_jsonl([r for _, r in records], fh)
        elif args.format == "csv":
            fh.write(csv_text(["task", "input", "cot", "answer"],
                              [(r.task, r.input, r.cot, r.answer) for _, r in records]))
        else:
            for trace, _ in records:
                fh.write(" ".join(trace.cot if args.cot_only else trace.tokens) + "\n")
    return EXIT_OK


def _split_input(task: str, tokens: list[str], n: int | None) -> int:
    """Length of the input prefix of a raw trace line."""
    if task in ("parity", "dfa"):
        if n is None:
            raise UsageError(f"{task} traces in text form need --n")
        return n
    if task == "mult":
        seps = [i for i, t in enumerate(tokens) if t == T.mult.SEP]
        if len(seps) < 3:
            raise UsageError("multiplication trace lacks the '-1 X -1 Y -1' input")
        return seps[2] + 1
    if "SEP" not in tokens:
        raise UsageError(f"{task} trace lacks SEP")
    return tokens.index("SEP") + 1


def cmd_verify_cot(args) -> int:
    task = T.get_task(args.task)
    text = Path(args.file).read_text() if args.file != "-" else sys.stdin.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise UsageError("no traces to verify")
    failures = 0
    report = []
    for lineno, line in enumerate(lines, 1):
        opts = _task_opts(args)
        if line.lstrip().startswith("{"):
            rec = CorpusRecord.from_json(line)
            trace = rec.trace()
            if "k" in rec.meta and args.task in ("parity", "median"):
                opts["stride"] = rec.meta["k"]
            if args.task == "mult" and "mode" in rec.meta:
                opts["mode"] = rec.meta["mode"]
            if args.task == "reach" and "V" in rec.meta:
                opts["n_vertices"] = rec.meta["V"]
        else:
            toks = line.split()
            trace = TokenTrace(tuple(toks), _split_input(args.task, toks, args.n))
        if args.task == "median":
            opts["base"] = args.base
        try:
            inst = task.from_input(trace.input, **opts)
        except ValueError as e:
            verdict = T.Verdict(False, None, f"cannot read input: {e}")
        else:
            verdict = T.cot_verify_generic(args.task, inst, trace, **opts)
        if verdict:
            report.append(f"line {lineno}: ok")
        else:
            failures += 1
            where = "" if verdict.index is None else f" at index {verdict.index}"
            report.append(f"line {lineno}: FAIL{where}: {verdict.message}")
    with _sink(args.out) as fh:
        fh.write("\n".join(report) + "\n")
        fh.write(f"{len(lines) - failures}/{len(lines)} traces verified\n")
    return EXIT_FAIL if failures else EXIT_OK


def _builtin_program(args):
    from . import programs as P

    name, n = args.builtin, args.n
    if n is None:
        raise UsageError("--builtin needs --n")
    if name == "and":
        return P.and_head(n), None
    if name == "dot":
        try:
            return P.parity_dot_by_dot(n), {P.DOT_OUT[2], P.DOT_OUT[3]}
        except ValueError as e:
            raise ResourceCap(str(e)) from None
    if name == "median":
        return P.median_sorter(n, args.value_range), {P.EOS}
    if name.startswith("tm:"):
        tm = P.FIXTURES[name[3:]]()
        prog = P.tm_compile(tm, n)
        return prog, set(prog.meta["answers"])
    raise UsageError(f"unknown builtin {name!r}")


def cmd_vm_run(args) -> int:
    if bool(args.program) == bool(args.builtin):
        raise UsageError("give exactly one of --program or --builtin")
    if args.program:
        with open(args.program) as fh:
            prog = load_program(fh)
        stop = None
    else:
        prog, stop = _builtin_program(args)
    if args.stop:
        stop = set(args.stop)
    tokens = args.input.split()
    if args.builtin and args.builtin.startswith("tm:") and tokens and tokens[-1] != "#":
        tokens.append("#")
    if args.builtin == "median" and tokens and tokens[-1] != "SEP":
        tokens.append("SEP")
    if not stop and args.max_steps is None:
        args.max_steps = 1
    trace, transcript = decode(prog, tokens, stop=stop, max_steps=args.max_steps)
    with _sink(args.out) as fh:
        if args.format == "csv":
            buf = io.StringIO()
            transcript.write_csv(buf)
            fh.write(buf.getvalue())
        elif args.format == "jsonl":
            fh.write(json.dumps({"program": prog.name, "trace": " ".join(trace.tokens),
                                 "cot": " ".join(trace.cot)}, sort_keys=True) + "\n")
        else:
            fh.write(" ".join(trace.cot if args.cot_only else trace.tokens) + "\n")
    if args.transcript:
        with open(args.transcript, "w") as fh:
            transcript.write_csv(fh)
    _plot(args, "plot_attention", transcript)
    return EXIT_OK


def cmd_compile_tm(args) -> int:
    from . import programs as P

    if bool(args.spec) == bool(args.fixture):
        raise UsageError("give exactly one of a spec file or --fixture")
    tm = P.parse_tm_spec(Path(args.spec).read_text()) if args.spec else P.FIXTURES[args.fixture]()
    prog = P.tm_compile(tm, args.n, max_steps=args.max_steps)
    with _sink(args.out) as fh:
        dump_program(prog, fh)
    return EXIT_OK


def _n_values(args) -> list[int]:
    if args.n:
        return args.n
    raise UsageError("--n needs at least one value")


def cmd_sensitivity(args) -> int:
    from . import boolean_lab as B
    from .boolean_lab.sensitivity import EXHAUSTIVE_CAP

    name = args.function
    if name == "mult_digits":
        rows = []
        for n in _n_values(args):
            sampled = None if args.method == "auto" else args.method == "sampled"
            try:
                for k, v, se in B.mult_digit_sensitivity(n, sampled=sampled, n_inputs=args.inputs,
                                                         n_flips=args.flips, seed=args.seed):
                    rows.append((n, k, v, se))
            except B.CapExceeded as e:
                raise ResourceCap(str(e)) from None
        _emit_table(args, ["N", "k", "as", "stderr"], rows)
        _plot(args, "plot_digit_sensitivity", rows)
        return EXIT_OK
    if name == "median":
        rows = []
        for n in _n_values(args):
            bits = args.bits or B.default_median_bits(n)
            est = B.median_lastdigit_sensitivity(n, bits, args.inputs, args.flips, seed=args.seed + n)
            rows.append((n, bits, est.value, est.stderr))
        _emit_table(args, ["N", "B", "estimate", "stderr"], rows)
        _plot(args, "plot_series", [r[0] for r in rows], [r[2] for r in rows],
              xlabel="N", ylabel="last-digit average sensitivity", yerr=[r[3] for r in rows],
              reference=([r[0] for r in rows], [r[0] / 2 for r in rows], "N/2"))
        return EXIT_OK
    rows = []
    for n in _n_values(args):
        f = B.by_name(name, n)
        use_exact = args.method == "exact" or (args.method == "auto" and f.arity <= EXHAUSTIVE_CAP)
        if use_exact:
            try:
                v = B.avg_sensitivity_exact(f)
            except B.CapExceeded as e:
                raise ResourceCap(str(e)) from None
            rows.append((n, str(v), float(v), 0.0, "exact"))
        else:
            est = B.avg_sensitivity_sampled(f, args.inputs, args.flips, seed=args.seed + n)
            rows.append((n, repr(est.value), est.value, est.stderr, "sampled"))
    _emit_table(args, ["N", "as", "as_float", "stderr", "method"], rows)
    _plot(args, "plot_series", [r[0] for r in rows], [r[2] for r in rows], xlabel="N",
          ylabel=f"average sensitivity ({name})", yerr=[r[3] for r in rows])
    return EXIT_OK


def cmd_fourier(args) -> int:
    from . import boolean_lab as B

    ts = range(args.t_min, args.t_max + 1)
    rows = B.fourier_scan(args.n, ts, combos=args.combos, samples=args.samples, seed=args.seed)
    _emit_table(args, ["T", "combo", "estimate", "stderr", "size_A", "size_B", "size_C"], rows)
    _plot(args, "plot_fourier", rows)
    return EXIT_OK


def cmd_restrict(args) -> int:
    from . import boolean_lab as B

    f = B.by_name(args.function, args.n)
    res = B.restriction_search(f, args.c, budget=args.budget, seed=args.seed)
    header = ["function", "arity", "C", "needed_stars", "found", "restriction", "max_stars",
              "max_star_fraction", "constant", "method", "checked"]
    row = (f.name, f.arity, args.c, math.ceil(args.c * f.arity), int(res.rho is not None),
           str(res.rho) if res.rho else "none", res.max_stars, res.max_star_fraction, res.value,
           res.method, res.checked)
    if args.format == "text":
        with _sink(args.out) as fh:
            for k, v in zip(header, row):
                fh.write(f"{k}: {_txt(v)}\n")
    else:
        _emit_table(args, header, [row])
    return EXIT_OK


def cmd_datagen(args) -> int:
    from . import datagen as D

    if not args.out or args.out == "-":
        raise UsageError("datagen needs --out DIR")
    n = args.n[0] if args.n else None
    if n is None:
        raise UsageError("datagen needs --n")
    if args.task == "median":
        corpus = D.gen_median_corpus(n, args.count, args.seed, stride=args.stride, digits=args.digits,
                                     test_size=args.test)
    elif args.task == "mult":
        corpus = D.gen_mult_corpus(n, args.seed, train=args.count, test=args.test, mode=args.mode)
    elif args.task == "parity":
        corpus = D.gen_parity_corpus(n, args.count, args.seed, test=args.test, stride=args.stride)
    elif args.task == "reach":
        corpus = D.gen_reach_corpus(n, args.count, args.seed, test=args.test,
                                    edge_prob=args.edge_prob, mode=args.reach_mode)
    else:
        raise UsageError(f"no corpus generator for {args.task!r}")
    manifest = corpus.write(args.out)
    print(json.dumps(manifest, sort_keys=True))
    return EXIT_OK


def length_rows(task_name: str, ns, samples: int, seed: int, opts: dict, reach_mode: str = "binary",
                edge_prob: float = 0.5):
    """(N, E, cot_tokens, cot_steps, model) per sampled instance."""
    task = T.get_task(task_name)
    rows = []
    for n in ns:
        for i in range(samples):
            sample_opts = {"mode": reach_mode, "edge_prob": edge_prob} if task_name == "reach" else {}
            inst = task.sample(rng(seed, n, i), n, **sample_opts)
            trace = task.generate(inst, **opts)
            e = len(inst.edges) if task_name == "reach" else ""
            rows.append((n, e, len(trace.cot), T.cot_length(trace), length_model(task_name, n, opts, e)))
    return rows


def length_model(task: str, n: int, opts: dict, edges="") -> float:
    if task == "mult":
        mode = opts.get("mode", T.COMPACT)
        return {T.SCHOOLBOOK: n * n, T.BUTTERFLIES: n * math.log2(n) if n > 1 else 1.0,
                T.COMPACT: n}[mode]
    if task == "reach":
        return max(1, edges) * math.log2(n)
    return n


def fit_constant(ratios) -> float:
    """Constant c minimising the worst multiplicative deviation of length / (c * model)."""
    return math.sqrt(min(ratios) * max(ratios))


def cmd_measure_lengths(args) -> int:
    opts = _task_opts(args)
    rows = length_rows(args.task, _n_values(args), args.samples, args.seed, opts, args.reach_mode,
                       args.edge_prob)
    ratios = [r[2] / r[4] for r in rows]
    fitted = fit_constant(ratios)
    out = [(*r, ratio, ratio / fitted) for r, ratio in zip(rows, ratios)]
    _emit_table(args, ["N", "E", "cot_tokens", "cot_steps", "model", "ratio", "ratio_to_fit"], out)
    xs = [r[4] for r in rows]
    _plot(args, "plot_series", xs, [r[2] for r in rows], xlabel="model size", ylabel="CoT tokens",
          reference=(sorted(xs), [fitted * x for x in sorted(xs)], f"{fitted:.3g} x model"), loglog=True)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="64-bit seed (default 0)")
    p.add_argument("--out", default=d(None), help="output file (directory for datagen); stdout if absent")
    p.add_argument("--format", choices=("text", "jsonl", "csv"), default=d(None))
    p.add_argument("--plot", default=d(None), metavar="PNG", help="also render a figure to this file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="uhatcot", description=__doc__.splitlines()[0])
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    def task_flags(p, tasks=tuple(T.TASKS)):
        p.add_argument("task", choices=tasks)
        p.add_argument("--n", type=int)
        p.add_argument("--stride", type=int, default=1)
        p.add_argument("--mode", choices=(T.COMPACT, T.BUTTERFLIES, T.SCHOOLBOOK), default=T.COMPACT)
        p.add_argument("--digits", type=int, default=3)
        p.add_argument("--base", type=int, choices=(2, 10), default=10)
        p.add_argument("--reach-mode", choices=("decimal", "binary"), default="decimal")
        p.add_argument("--edge-prob", type=float, default=0.5)

    p = add("gen-cot", cmd_gen_cot, "generate CoT traces")
    task_flags(p)
    p.add_argument("--input", help="parity/dfa input bits")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--numbers", help="median numbers, space or comma separated")
    p.add_argument("--vertices", type=int)
    p.add_argument("--edges", help="reach edges as 'u-v,u-v'")
    p.add_argument("--query", help="reach query as 's,t'")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--cot-only", action="store_true", help="print only the tokens after the input")

    p = add("verify-cot", cmd_verify_cot, "verify traces (text lines or JSON-lines records)")
    task_flags(p)
    p.add_argument("file")

    p = add("vm-run", cmd_vm_run, "decode with a UHAT program")
    p.add_argument("--program")
    p.add_argument("--builtin", help="and | dot | median | tm:<fixture>")
    p.add_argument("--n", type=int)
    p.add_argument("--value-range", type=int, default=16)
    p.add_argument("--input", required=True)
    p.add_argument("--stop", nargs="*")
    p.add_argument("--max-steps", type=int)
    p.add_argument("--transcript", help="write attended indices as CSV")
    p.add_argument("--cot-only", action="store_true")

    p = add("compile-tm", cmd_compile_tm, "compile a Turing machine to a UHAT program")
    p.add_argument("spec", nargs="?")
    p.add_argument("--fixture", choices=("parity", "unary_increment", "halting"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-steps", type=int)

    p = add("sensitivity", cmd_sensitivity, "average sensitivity tables")
    p.add_argument("function", help="parity|and|or|majority|const0|const1|mult_digit:K|mult_digits|median")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--method", choices=("auto", "exact", "sampled"), default="auto")
    p.add_argument("--inputs", type=int, default=200)
    p.add_argument("--flips", type=int, default=200)
    p.add_argument("--bits", type=int, help="median: bits per number (default 1+ceil(log2 N))")

    p = add("fourier", cmd_fourier, "product-digit correlation scan")
    p.add_argument("--n", type=int, default=12)
    p.add_argument("--t-min", type=int, default=2)
    p.add_argument("--t-max", type=int, default=10)
    p.add_argument("--combos", type=int, default=100)
    p.add_argument("--samples", type=int, default=100_000)

    p = add("restrict", cmd_restrict, "search for constancy-forcing restrictions")
    p.add_argument("function")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--budget", type=int, default=100_000)

    p = add("datagen", cmd_datagen, "write a train/test corpus and manifest")
    task_flags(p, ("median", "mult", "parity", "reach"))
    p.set_defaults(n=None)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--test", type=int)

    p = add("measure-lengths", cmd_measure_lengths, "CoT length against N")
    task_flags(p)
    p.set_defaults(reach_mode="binary")
    p.add_argument("--samples", type=int, default=5)

    # datagen and measure-lengths accept several --n values
    for name in ("datagen", "measure-lengths"):
        for action in sub.choices[name]._actions:
            if action.dest == "n":
                action.nargs = "+"
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    if args.format is None:
        args.format = "csv" if args.command in ("sensitivity", "fourier", "measure-lengths") else "text"
    try:
        return args.func(args)
    except (ResourceCap, ContextOverflow) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except DecodeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, ValueError, KeyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
