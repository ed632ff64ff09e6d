"""Accuracy, robustness on refactored test sets, and the multi-seed experiment grid."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Optional

import numpy as np

from mixcode import model as M
from mixcode.corpus import Dataset, GeneratorSpec, generate, load_dataset
from mixcode.mixup import MixPolicy, Pairing
from mixcode.refactor import ALL_METHODS, Analysis, Method, NoApplicableMethod, random_refactor
from mixcode.represent import DEFAULT_MAX_VOCAB, DEFAULT_SEQ_LEN, Encoder, build_vocab
from mixcode.seeding import rng_for
from mixcode.training import RunSpec, encoder_kind, train

IDENTITY = "identity"  # breakdown key for variants where no method applied
DEFAULT_K = {"problem-classification": 5, "bug-detection": 10}
CSV_COLUMNS = ("dataset", "task", "model", "strategy", "alpha", "method_subset", "runs",
               "acc_mean", "acc_std", "rob_mean", "rob_std", "status")
TRACE_COLUMNS = ("run", "epoch", "loss", "heldout_acc")


class EmptyTestSet(ValueError):
    pass


# --- single-model measures --------------------------------------------------------

def _check(test: Dataset) -> None:
    if len(test) == 0:
        raise EmptyTestSet("test set has no samples")


def accuracy(model: M.Classifier, test: Dataset, encoder: Encoder) -> float:
    _check(test)
    pred = M.predict_batch(model, encoder.encode_all(test.programs))
    return float(np.mean(pred == np.asarray(test.labels)))


@dataclass(frozen=True)
class RobustSet:
    programs: list
    labels: np.ndarray
    methods: list  # kebab name of the method behind each variant, or IDENTITY


def robust_set(test: Dataset, methods, K: int, rng) -> RobustSet:
    """K random single refactorings of every test program, grouped by program."""
    if K < 1:
        raise ValueError("K must be >= 1")
    _check(test)
    methods = tuple(m for m in ALL_METHODS if m in set(methods))
    progs, labels, used = [], [], []
    for s in test.samples:
        analysis = Analysis(s.program)
        for _ in range(K):
            try:
                out = random_refactor(s.program, methods, rng, analysis=analysis)
                progs.append(out.program)
                used.append(out.method.kebab)
            except NoApplicableMethod:
                progs.append(s.program)
                used.append(IDENTITY)
            labels.append(s.label)
    return RobustSet(progs, np.asarray(labels), used)


def _score(model: M.Classifier, X: np.ndarray, rs: RobustSet) -> tuple[float, dict]:
    hits = M.predict_batch(model, X) == rs.labels
    per: dict = {}
    for h, m in zip(hits, rs.methods):
        a = per.setdefault(m, [0, 0])
        a[0] += int(h)
        a[1] += 1
    return float(np.mean(hits)), {m: c / t for m, (c, t) in sorted(per.items())}


def robustness(model: M.Classifier, test: Dataset, methods, K: int, rng, encoder: Encoder) -> float:
    """Accuracy over K randomly refactored copies of each test program."""
    rs = robust_set(test, methods, K, rng)
    return _score(model, encoder.encode_all(rs.programs), rs)[0]


def robustness_breakdown(model: M.Classifier, test: Dataset, methods, K: int, rng,
                         encoder: Encoder) -> tuple[float, dict]:
    """Robustness plus accuracy restricted to the variants each method produced."""
    rs = robust_set(test, methods, K, rng)
    return _score(model, encoder.encode_all(rs.programs), rs)


# --- reports ----------------------------------------------------------------------

def pct(x: float) -> str:
    """Percent with two decimals, ties to even (applied to the shortest repr of x)."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    d = Decimal(repr(float(x))) * 100
    return str(d.quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class RunResult:
    seed: int
    accuracy: float
    robustness: float
    per_method: dict
    trace: M.TrainTrace


@dataclass(frozen=True)
class EvalReport:
    runs: int
    acc_mean: float
    acc_std: float
    rob_mean: float
    rob_std: float
    per_method: dict = field(default_factory=dict)  # method -> mean robustness over runs

    @property
    def accuracy(self) -> float:
        return self.acc_mean

    @property
    def robustness(self) -> float:
        return self.rob_mean


def summarize(results: list) -> EvalReport:
    """Mean and population std over runs."""
    if not results:
        raise ValueError("no runs to summarize")
    acc = np.array([r.accuracy for r in results])
    rob = np.array([r.robustness for r in results])
    keys = sorted({k for r in results for k in r.per_method})
    per = {k: float(np.mean([r.per_method[k] for r in results if k in r.per_method])) for k in keys}
    return EvalReport(len(results), float(acc.mean()), float(acc.std()), float(rob.mean()),
                      float(rob.std()), per)


# --- experiments --------------------------------------------------------------------

@dataclass(frozen=True)
class DataRef:
    """Either generated data (optionally regenerated from every run seed) or two files."""

    task: str = "problem-classification"
    generator: Optional[GeneratorSpec] = field(default_factory=GeneratorSpec)
    sweep: bool = True  # generator seed := run seed
    train_path: Optional[str] = None
    test_path: Optional[str] = None
    name: str = "synthetic"

    def load(self, seed: int) -> tuple[Dataset, Dataset]:
        if self.train_path is not None:
            return load_dataset(self.train_path), load_dataset(self.test_path)
        gen = replace(self.generator, seed=seed) if self.sweep else self.generator
        return generate(self.task, gen)


@dataclass(frozen=True)
class MethodSubset:
    name: str
    methods: frozenset

    @staticmethod
    def single(m: Method) -> "MethodSubset":
        return MethodSubset(m.kebab, frozenset({m}))


ALL_SUBSET = MethodSubset("all", frozenset(ALL_METHODS))


@dataclass(frozen=True)
class Cell:
    model: str
    strategy: str
    alpha: Optional[float] = None
    pairing: Optional[Pairing] = None
    subset: Optional[MethodSubset] = None

    @property
    def strategy_label(self) -> str:
        if self.strategy == "mixcode" and self.pairing is not Pairing.ORI_REF:
            return f"mixcode-{self.pairing.value}"
        return self.strategy


@dataclass(frozen=True)
class ExperimentSpec:
    data: DataRef = field(default_factory=DataRef)
    models: tuple = (M.BAG,)
    strategies: tuple = ("standard", "basic", "mixcode")
    alphas: tuple = (0.1,)
    pairings: tuple = (Pairing.ORI_REF,)
    subsets: tuple = (ALL_SUBSET,)
    K: Optional[int] = None  # None -> per-task default
    seeds: tuple = (1, 2, 3, 4, 5)
    train: M.TrainConfig = field(default_factory=M.TrainConfig)
    max_vocab: int = DEFAULT_MAX_VOCAB
    seq_len: int = DEFAULT_SEQ_LEN
    rank_followup: bool = False  # after single-method cells, add good/poor rows

    def __post_init__(self):
        if self.K is not None and self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        for m in self.models:
            if m not in M.KINDS:
                raise ValueError(f"unknown model kind {m!r}")

    @property
    def k(self) -> int:
        return self.K if self.K is not None else DEFAULT_K[self.data.task]

    def cells(self) -> list:
        out = []
        for model in self.models:
            for strategy in self.strategies:
                if strategy == "standard":
                    out.append(Cell(model, strategy))
                elif strategy == "basic":
                    out.extend(Cell(model, strategy, subset=s) for s in self.subsets)
                elif strategy == "mixcode":
                    for pairing in self.pairings:
                        for alpha in self.alphas:
                            for s in self.subsets:
                                out.append(Cell(model, strategy, alpha, pairing, s))
                else:
                    raise ValueError(f"unknown strategy {strategy!r}")
        return out


@dataclass(frozen=True)
class Row:
    cell: Cell
    dataset: str
    task: str
    report: Optional[EvalReport]
    status: str
    results: tuple = ()
    error: str = ""

    def csv_values(self) -> list:
        c, r = self.cell, self.report
        base = [self.dataset, self.task, c.model, c.strategy_label,
                "-" if c.alpha is None else repr(c.alpha),
                "-" if c.subset is None else c.subset.name]
        if r is None:
            return base + [str(len(self.results)), "", "", "", "", self.status]
        return base + [str(r.runs), pct(r.acc_mean), pct(r.acc_std), pct(r.rob_mean),
                       pct(r.rob_std), self.status]


class _Workspace:
    """Per-process cache of datasets, encoders and robustness sets by seed."""

    def __init__(self, spec: ExperimentSpec):
        self.spec = spec
        self._data: dict = {}
        self._enc: dict = {}
        self._rob: dict = {}

    def data(self, seed: int):
        key = seed if (self.spec.data.train_path is None and self.spec.data.sweep) else None
        if key not in self._data:
            self._data[key] = self.spec.data.load(seed)
        return self._data[key]

    def encoder(self, seed: int, kind: str) -> Encoder:
        train_ds, _ = self.data(seed)
        key = (id(train_ds), kind)
        if key not in self._enc:
            vocab = build_vocab(train_ds.programs, self.spec.max_vocab)
            self._enc[key] = Encoder(kind, vocab, self.spec.seq_len)
        return self._enc[key]

    def robust(self, seed: int, kind: str):
        # the same transformed test set for every cell of a seed
        if seed not in self._rob:
            _, test_ds = self.data(seed)
            self._rob[seed] = {"set": robust_set(test_ds, ALL_METHODS, self.spec.k, rng_for(seed, "robust"))}
        entry = self._rob[seed]
        if kind not in entry:
            entry[kind] = self.encoder(seed, kind).encode_all(entry["set"].programs)
        return entry["set"], entry[kind]


def run_one(ws: _Workspace, cell: Cell, seed: int) -> RunResult:
    spec = ws.spec
    train_ds, test_ds = ws.data(seed)
    _check(test_ds)
    kind = encoder_kind(cell.model)
    enc = ws.encoder(seed, kind)
    policy = MixPolicy()
    if cell.strategy == "mixcode":
        policy = MixPolicy(alpha=cell.alpha, pairing=cell.pairing, methods=cell.subset.methods)
    elif cell.strategy == "basic":
        policy = MixPolicy(methods=cell.subset.methods)
    run = RunSpec(cell.model, cell.strategy, policy, spec.train, seed)
    TX = enc.encode_all(test_ds.programs)
    TY = np.asarray(test_ds.labels)
    model, trace = train(run, train_ds.programs, train_ds.labels, train_ds.num_classes, enc, (TX, TY))
    acc = float(np.mean(M.predict_batch(model, TX) == TY))
    rs, RX = ws.robust(seed, kind)
    rob, per = _score(model, RX, rs)
    return RunResult(seed, acc, rob, per, trace)


def _cell_row(ws: _Workspace, cell: Cell) -> Row:
    spec = ws.spec
    results = []
    task = spec.data.task
    try:
        for seed in spec.seeds:
            results.append(run_one(ws, cell, seed))
    except (M.DivergedError, FloatingPointError, ValueError) as e:
        return Row(cell, spec.data.name, task, None, "failed", tuple(results), f"{type(e).__name__}: {e}")
    report = summarize(results)
    num_classes = ws.data(spec.seeds[0])[0].num_classes
    status = "degenerate" if report.acc_mean <= 1.0 / num_classes else "ok"
    return Row(cell, spec.data.name, task, report, status, tuple(results))


_WORKER: dict = {}


def _worker_row(args) -> Row:
    spec, cell = args
    ws = _WORKER.get(id(spec))
    if ws is None or ws.spec != spec:
        ws = _WORKER[id(spec)] = _Workspace(spec)
    return _cell_row(ws, cell)


def _run_cells(spec: ExperimentSpec, cells: list, jobs: int, ws: _Workspace) -> list:
    if jobs <= 1 or len(cells) <= 1:
        return [_cell_row(ws, c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves input order, so the table does not depend on scheduling
        return list(pool.map(_worker_row, [(spec, c) for c in cells]))


def rank_methods(accuracies: dict) -> tuple[frozenset, frozenset]:
    """Split methods by single-method accuracy; ties broken by name, odd extra goes to good."""
    def key(m):
        name = m.kebab if isinstance(m, Method) else str(m)
        return (-accuracies[m], name)
    order = sorted(accuracies, key=key)
    half = (len(order) + 1) // 2
    return frozenset(order[:half]), frozenset(order[half:])


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> list:
    """One row per cell in spec order; failed cells are kept and flagged."""
    ws = _Workspace(spec)
    rows = _run_cells(spec, spec.cells(), jobs, ws)
    if spec.rank_followup:
        extra = []
        for model in spec.models:
            singles = {}
            for r in rows:
                s = r.cell.subset
                if (r.cell.model == model and r.cell.strategy == "mixcode" and s is not None
                        and len(s.methods) == 1 and r.report is not None):
                    singles[next(iter(s.methods))] = r.report.acc_mean
            if len(singles) < 2:
                continue
            good, poor = rank_methods(singles)
            for pairing in spec.pairings:
                for alpha in spec.alphas:
                    for sub in (MethodSubset("good", good), MethodSubset("poor", poor)):
                        extra.append(Cell(model, "mixcode", alpha, pairing, sub))
        rows += _run_cells(spec, extra, jobs, ws)
    return rows


# --- presets and output ---------------------------------------------------------------

PRESETS = ("rq1", "rq2-strategy", "rq2-alpha", "rq3")
RQ2_ALPHAS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)


def preset(name: str, **overrides) -> ExperimentSpec:
    if name == "rq1":
        base = dict(strategies=("standard", "basic", "mixcode"))
    elif name == "rq2-strategy":
        base = dict(strategies=("mixcode",), pairings=tuple(Pairing))
    elif name == "rq2-alpha":
        base = dict(strategies=("mixcode",), alphas=RQ2_ALPHAS)
    elif name == "rq3":
        base = dict(strategies=("mixcode",), subsets=tuple(MethodSubset.single(m) for m in ALL_METHODS),
                    rank_followup=True)
    else:
        raise ValueError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    base.update(overrides)
    return ExperimentSpec(**base)


def rows_to_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_values())
    return buf.getvalue()


def trace_to_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for res in results:
        for epoch, (loss, acc) in enumerate(zip(res.trace.loss, res.trace.heldout_acc)):
            w.writerow([res.seed, epoch, repr(loss), "" if math.isnan(acc) else repr(acc)])
    return buf.getvalue()


def trace_name(row: Row) -> str:
    c = row.cell
    parts = [c.model, c.strategy_label]
    if c.alpha is not None:
        parts.append(f"a{c.alpha!r}")
    if c.subset is not None:
        parts.append(c.subset.name)
    return "trace_" + "_".join(parts) + ".csv"
