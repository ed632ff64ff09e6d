"""Command-line interface: gen, augment, train, eval, experiment.

Every command accepts ``--config FILE`` with flat ``key=value`` lines
(``#`` starts a comment); explicit flags win over the file. Each command
writes a ``manifest.txt`` into its output directory that, passed back as
``--config``, reproduces the run.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from mixcode import __version__
from mixcode import model as M
from mixcode.corpus import (
    Dataset, FormatError, GenerationFailed, GeneratorSpec, Sample, generate, load_dataset,
    save_dataset,
)
from mixcode.eval import (
    DEFAULT_K, PRESETS, RQ2_ALPHAS, DataRef, ExperimentSpec, MethodSubset, accuracy, preset,
    robustness_breakdown, rows_to_csv, trace_name, trace_to_csv,
)
from mixcode.mixup import EpochBuilder, MixPolicy, Pairing
from mixcode.refactor import NoApplicableMethod, parse_methods, random_refactor
from mixcode.represent import DEFAULT_MAX_VOCAB, DEFAULT_SEQ_LEN, Encoder, Vocabulary, build_vocab
from mixcode.seeding import rng_for
from mixcode.training import RunSpec, encoder_kind, train

MANIFEST = "manifest.txt"


class UsageError(Exception):
    """Bad flags, config values or missing inputs (exit 2)."""


# --- config files -------------------------------------------------------------------

def read_config(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_manifest(out: Path, command: str, args: argparse.Namespace, extra: dict) -> None:
    lines = [f"# mixcode {__version__} manifest; rerun with: mixcode {command} --config {MANIFEST}",
             f"command={command}"]
    for key in sorted(vars(args)):
        if key in ("config", "func", "command"):
            continue
        value = getattr(args, key)
        if value is None:
            continue
        lines.append(f"{key}={_fmt(value)}")
    for key in sorted(extra):
        lines.append(f"# {key}={_fmt(extra[key])}")
    (out / MANIFEST).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --- argument types -----------------------------------------------------------------

def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _words(text: str) -> tuple:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _methods(text: str) -> frozenset:
    try:
        return parse_methods(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _pairing(text: str) -> Pairing:
    try:
        return Pairing.parse(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _need(args, *names) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required (flag or config key)")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("MIXCODE_OUT") or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load(path) -> Dataset:
    if not Path(path).is_file():
        raise UsageError(f"no such dataset file: {path}")
    return load_dataset(path)


def _task(name: str) -> str:
    if name in ("classification", "problem-classification"):
        return "problem-classification"
    if name in ("bug", "bug-detection"):
        return "bug-detection"
    raise UsageError(f"unknown task {name!r}")


# --- commands -------------------------------------------------------------------------

def cmd_gen(args) -> int:
    task = _task(args.task)
    try:
        spec = GeneratorSpec(args.problems, args.per_problem, args.seed, args.mutation_rate)
    except ValueError as e:
        raise UsageError(str(e)) from None
    train_ds, test_ds = generate(task, spec)
    out = _out_dir(args)
    save_dataset(train_ds, out / "train.mpyds")
    save_dataset(test_ds, out / "test.mpyds")
    write_manifest(out, "gen", args, {"train_samples": len(train_ds), "test_samples": len(test_ds)})
    print(f"wrote {len(train_ds)} train / {len(test_ds)} test samples to {out}")
    return 0


def _mixup_csv(ds: Dataset, encoder: Encoder, policy: MixPolicy, rng) -> str:
    samples = EpochBuilder(ds.programs, ds.labels, ds.num_classes, encoder, policy).build(rng)
    width = int(np.prod(encoder.shape))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i}" for i in range(width)] + [f"y{c}" for c in range(ds.num_classes)]
               + ["lambda", "first", "second"])
    for s in samples:
        w.writerow([repr(float(v)) for v in s.features.reshape(-1)]
                   + [repr(float(v)) for v in s.label] + [repr(s.lambda_used), s.first, s.second])
    return buf.getvalue()


def cmd_augment(args) -> int:
    _need(args, "data")
    methods = _methods(args.methods)
    ds = _load(args.data)
    out = _out_dir(args)
    rng = rng_for(args.seed, "augment")
    if args.mode == "refactor":
        samples, changed = [], 0
        for s in ds.samples:
            try:
                prog = random_refactor(s.program, methods, rng).program
                changed += 1
            except NoApplicableMethod:
                prog = s.program
            samples.append(Sample(prog, s.label, s.probes))
        save_dataset(Dataset(samples, ds.task, ds.num_classes, ds.split), out / "augmented.mpyds")
        write_manifest(out, "augment", args, {"transformed": changed, "copied": len(samples) - changed})
        print(f"transformed {changed} of {len(samples)} programs")
        return 0
    try:
        policy = MixPolicy(alpha=args.alpha, pairing=_pairing(args.strategy), methods=methods)
    except ValueError as e:
        raise UsageError(str(e)) from None
    encoder = Encoder(args.repr, build_vocab(ds.programs, args.max_vocab), args.seq_len)
    (out / "mixup.csv").write_text(_mixup_csv(ds, encoder, policy, rng), encoding="utf-8")
    encoder.vocab.save(out / "vocab.txt")
    write_manifest(out, "augment", args, {"samples": len(ds)})
    print(f"wrote {len(ds)} mixed samples to {out / 'mixup.csv'}")
    return 0


def _train_config(args) -> M.TrainConfig:
    try:
        return M.TrainConfig(args.epochs, args.lr, args.batch_size, args.optimizer)
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_train(args) -> int:
    _need(args, "train")
    methods = _methods(args.methods)
    train_ds = _load(args.train)
    heldout_ds = _load(args.test) if args.test else None
    try:
        policy = MixPolicy(alpha=args.alpha, pairing=_pairing(args.pairing), methods=methods)
        spec = RunSpec(args.model, args.strategy, policy, _train_config(args), args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    encoder = Encoder(encoder_kind(args.model), build_vocab(train_ds.programs, args.max_vocab), args.seq_len)
    heldout = None
    if heldout_ds is not None and len(heldout_ds):
        heldout = (encoder.encode_all(heldout_ds.programs), np.asarray(heldout_ds.labels))
    model, trace = train(spec, train_ds.programs, train_ds.labels, train_ds.num_classes, encoder, heldout)
    out = _out_dir(args)
    M.save(model, out / "model.json", extra={
        "encoder": encoder.kind, "seq_len": encoder.seq_len, "vocab": list(encoder.vocab.lexemes),
        "task": train_ds.task,
    })
    (out / "trace.csv").write_text(trace_to_csv([_Traced(args.seed, trace)]), encoding="utf-8")
    write_manifest(out, "train", args, {"final_loss": trace.loss[-1]})
    print(f"trained {args.model} ({args.strategy}); final loss {trace.loss[-1]:.4f}")
    return 0


class _Traced:
    def __init__(self, seed, trace):
        self.seed = seed
        self.trace = trace


def cmd_eval(args) -> int:
    _need(args, "checkpoint", "test")
    if not Path(args.checkpoint).is_file():
        raise UsageError(f"no such checkpoint: {args.checkpoint}")
    model, doc = M.load(args.checkpoint)
    try:
        encoder = Encoder(doc["encoder"], Vocabulary(tuple(doc["vocab"])), int(doc["seq_len"]))
    except KeyError as e:
        raise UsageError(f"checkpoint lacks encoder field {e}") from None
    test_ds = _load(args.test)
    methods = _methods(args.methods)
    K = args.K if args.K is not None else DEFAULT_K[test_ds.task]
    if K < 1:
        raise UsageError("K must be >= 1")
    acc = accuracy(model, test_ds, encoder)
    rob, per = robustness_breakdown(model, test_ds, methods, K, rng_for(args.seed, "robust"), encoder)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "value"])
    w.writerow(["accuracy", repr(acc)])
    w.writerow(["robustness", repr(rob)])
    for m, v in per.items():
        w.writerow([f"robustness:{m}", repr(v)])
    out = _out_dir(args)
    (out / "report.csv").write_text(buf.getvalue(), encoding="utf-8")
    write_manifest(out, "eval", args, {"K": K})
    print(f"accuracy {acc:.4f}  robustness {rob:.4f} (K={K}, {K * len(test_ds)} variants)")
    return 0


def experiment_spec(args) -> ExperimentSpec:
    if args.data_dir:
        d = Path(args.data_dir)
        train_path, test_path = d / "train.mpyds", d / "test.mpyds"
        for p in (train_path, test_path):
            if not p.is_file():
                raise UsageError(f"no such dataset file: {p}")
        task = load_dataset(train_path).task
        data = DataRef(task, None, False, str(train_path), str(test_path), name=d.name or "data")
    else:
        fixed = args.corpus_seed is not None
        try:
            gen = GeneratorSpec(args.problems, args.per_problem, args.corpus_seed if fixed else 0,
                                args.mutation_rate)
        except ValueError as e:
            raise UsageError(str(e)) from None
        data = DataRef(_task(args.task), gen, sweep=not fixed or args.sweep, name="synthetic")
    overrides = dict(data=data, seeds=args.seeds, train=_train_config(args), K=args.K,
                     max_vocab=args.max_vocab, seq_len=args.seq_len)
    if args.models:
        overrides["models"] = args.models
    if args.strategies:
        overrides["strategies"] = args.strategies
    if args.alphas:
        overrides["alphas"] = args.alphas
    if args.pairings:
        overrides["pairings"] = tuple(_pairing(p) for p in args.pairings)
    if args.methods and args.preset != "rq3":
        overrides["subsets"] = (MethodSubset(args.methods if args.methods != "all" else "all",
                                             _methods(args.methods)),)
    try:
        return preset(args.preset, **overrides)
    except (ValueError, TypeError) as e:
        raise UsageError(str(e)) from None


def cmd_experiment(args) -> int:
    from mixcode.eval import run_experiment
    spec = experiment_spec(args)
    rows = run_experiment(spec, jobs=args.jobs)
    out = _out_dir(args)
    (out / "results.csv").write_text(rows_to_csv(rows), encoding="utf-8")
    traces = out / "traces"
    traces.mkdir(exist_ok=True)
    for r in rows:
        if r.results:
            (traces / trace_name(r)).write_text(trace_to_csv(r.results), encoding="utf-8")
    failed = [r for r in rows if r.status == "failed"]
    write_manifest(out, "experiment", args, {"cells": len(rows), "failed": len(failed)})
    sys.stdout.write(rows_to_csv(rows))
    for r in failed:
        print(f"failed cell {r.cell.model}/{r.cell.strategy_label}/{r.cell.alpha}: {r.error}", file=sys.stderr)
    return 0


# --- parser ---------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--out", help="output directory (default: $MIXCODE_OUT or ./out)")
    p.add_argument("--seed", type=int, default=0, help="global seed")


def _training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=None, help="learning rate (default depends on optimizer/model)")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--optimizer", choices=M.OPTIMIZERS, default="adam")
    p.add_argument("--max-vocab", type=int, default=DEFAULT_MAX_VOCAB)
    p.add_argument("--seq-len", type=int, default=DEFAULT_SEQ_LEN)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixcode", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"mixcode {__version__}")
    sub = parser.add_subparsers(dest="command")

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    _common(g)
    g.add_argument("--task", default="classification", help="classification | bug-detection")
    g.add_argument("--problems", type=int, default=8)
    g.add_argument("--per-problem", type=int, default=60)
    g.add_argument("--mutation-rate", type=float, default=1.0)
    g.set_defaults(func=cmd_gen, seed=7)

    a = sub.add_parser("augment", help="refactor a dataset or export one epoch of mixed samples")
    _common(a)
    a.add_argument("--data", help=".mpyds input")
    a.add_argument("--mode", choices=("refactor", "mixup"), default="refactor")
    a.add_argument("--methods", default="all", help="comma list of refactoring methods, or 'all'")
    a.add_argument("--alpha", type=float, default=0.1)
    a.add_argument("--strategy", default="ori-ref", help="ori-ori | ori-ref | ref-ref")
    a.add_argument("--repr", choices=("bag", "seq"), default="bag")
    a.add_argument("--max-vocab", type=int, default=DEFAULT_MAX_VOCAB)
    a.add_argument("--seq-len", type=int, default=DEFAULT_SEQ_LEN)
    a.set_defaults(func=cmd_augment)

    t = sub.add_parser("train", help="train one classifier")
    _common(t)
    t.add_argument("--train", help="training .mpyds")
    t.add_argument("--test", help="optional held-out .mpyds scored after each epoch")
    t.add_argument("--model", choices=M.KINDS, default=M.BAG)
    t.add_argument("--strategy", choices=("standard", "basic", "mixcode"), default="mixcode")
    t.add_argument("--alpha", type=float, default=0.1)
    t.add_argument("--pairing", default="ori-ref")
    t.add_argument("--methods", default="all")
    _training_flags(t)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="accuracy and robustness of a checkpoint")
    _common(e)
    e.add_argument("--checkpoint")
    e.add_argument("--test")
    e.add_argument("--methods", default="all")
    e.add_argument("--K", type=int, default=None, help="variants per test program (default 5 or 10 by task)")
    e.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="run a multi-seed experiment grid")
    _common(x)
    x.add_argument("--preset", choices=PRESETS, default="rq1")
    x.add_argument("--seeds", type=_ints, default=(1, 2, 3, 4, 5))
    x.add_argument("--models", type=_words, default=None, help=f"comma list of {', '.join(M.KINDS)}")
    x.add_argument("--strategies", type=_words, default=None)
    x.add_argument("--alphas", type=_floats, default=None, help=f"e.g. {','.join(map(str, RQ2_ALPHAS))}")
    x.add_argument("--pairings", type=_words, default=None)
    x.add_argument("--methods", default=None, help="training method subset (not used by rq3)")
    x.add_argument("--K", type=int, default=None)
    x.add_argument("--data-dir", default=None, help="directory with train.mpyds and test.mpyds")
    x.add_argument("--task", default="classification")
    x.add_argument("--problems", type=int, default=8)
    x.add_argument("--per-problem", type=int, default=60)
    x.add_argument("--mutation-rate", type=float, default=1.0)
    x.add_argument("--corpus-seed", type=int, default=None,
                   help="fixed corpus seed; by default the corpus is regenerated from each run seed")
    x.add_argument("--sweep", action="store_true", help="regenerate the corpus per seed even with --corpus-seed")
    x.add_argument("--jobs", type=int, default=1)
    _training_flags(x)
    x.set_defaults(func=cmd_experiment)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list) -> argparse.Namespace:
    """Parse twice: once to find --config, then with file values as defaults."""
    first = parser.parse_args(argv)
    if not first.config:
        return first
    values = read_config(first.config)
    command = values.pop("command", first.command)
    if command != first.command:
        raise UsageError(f"config is for command {command!r}, not {first.command!r}")
    sub = parser._subparsers._group_actions[0].choices[first.command]
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        act = actions.get(key)
        if act is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes")
            continue
        try:
            value = act.type(raw) if act.type else raw
        except (argparse.ArgumentTypeError, ValueError) as e:
            raise UsageError(f"config key {key!r}: {e}") from None
        if act.choices is not None and value not in act.choices:
            raise UsageError(f"config key {key!r}: {value!r} not in {list(act.choices)}")
        defaults[key] = value
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(build_parser(), argv)
        return args.func(args)
    except SystemExit as e:  # argparse usage errors and --help/--version
        return e.code if isinstance(e.code, int) else 2
    except UsageError as e:
        print(f"mixcode: error: {e}", file=sys.stderr)
        return 2
    except (FormatError, GenerationFailed, M.DivergedError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"mixcode: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
