from __future__ import annotations

import numpy as np
import pytest

from mixcode import eval as E
from mixcode import model as M
from mixcode.corpus import Dataset, GeneratorSpec, Sample
from mixcode.mixup import Pairing
from mixcode.refactor import ALL_METHODS, Method
from mixcode.represent import Encoder, build_vocab
from mixcode.seeding import rng_for
from mixcode.training import RunSpec, train


def constant_model(enc, C, cls=0):
    m = M.init(M.BAG, {"input": enc.vocab.size}, C, 0)
    for k in m.params:
        m.params[k][...] = 0.0
    m.params["b2"][cls] = 1.0
    return m


@pytest.fixture(scope="module")
def seed7(corpus7):
    train_ds, test_ds = corpus7
    enc = Encoder("bag", build_vocab(train_ds.programs))
    model, _ = train(RunSpec(strategy="standard", seed=7), train_ds.programs, train_ds.labels, 8, enc)
    return model, enc


def two_class(corpus7, per=8):
    train_ds, _ = corpus7
    picked = [Sample(s.program, 0, s.probes) for s in train_ds.samples if s.label == 2][:per]
    picked += [Sample(s.program, 1, s.probes) for s in train_ds.samples if s.label == 3][:per]
    return Dataset(picked, "problem-classification", 2, "test")


def test_constant_predictor_on_balanced_set(corpus7):
    ds = two_class(corpus7)
    enc = Encoder("bag", build_vocab(ds.programs))
    m = constant_model(enc, 2)
    assert E.accuracy(m, ds, enc) == 0.5
    # invariant to every transform, so robustness equals its accuracy
    assert E.robustness(m, ds, ALL_METHODS, 3, np.random.default_rng(0), enc) == 0.5


def test_memorizer_on_its_train_set(corpus7):
    ds = two_class(corpus7)
    enc = Encoder("bag", build_vocab(ds.programs))
    model, _ = train(RunSpec(strategy="standard", config=M.TrainConfig(epochs=100), seed=1),
                     ds.programs, ds.labels, 2, enc)
    assert E.accuracy(model, ds, enc) == 1.0


def test_empty_test_set(seed7):
    model, enc = seed7
    empty = Dataset([], "problem-classification", 8, "test")
    with pytest.raises(E.EmptyTestSet):
        E.accuracy(model, empty, enc)
    with pytest.raises(E.EmptyTestSet):
        E.robustness(model, empty, ALL_METHODS, 5, np.random.default_rng(0), enc)


def test_robust_set_size(corpus7):
    _, test_ds = corpus7
    rs = E.robust_set(test_ds, ALL_METHODS, 5, np.random.default_rng(0))
    assert len(rs.programs) == len(rs.labels) == len(rs.methods) == 480
    assert rs.labels.tolist() == [y for y in test_ds.labels for _ in range(5)]
    with pytest.raises(ValueError):
        E.robust_set(test_ds, ALL_METHODS, 0, np.random.default_rng(0))


def test_identity_only_robustness_equals_accuracy(corpus7, seed7):
    model, enc = seed7
    _, test_ds = corpus7
    for K in (1, 3):
        rob = E.robustness(model, test_ds, set(), K, np.random.default_rng(0), enc)
        assert rob == E.accuracy(model, test_ds, enc)


def test_robustness_is_deterministic(corpus7, seed7):
    model, enc = seed7
    _, test_ds = corpus7
    a = E.robustness_breakdown(model, test_ds, ALL_METHODS, 2, rng_for(3, "robust"), enc)
    b = E.robustness_breakdown(model, test_ds, ALL_METHODS, 2, rng_for(3, "robust"), enc)
    assert a == b
    assert set(a[1]) <= {m.kebab for m in ALL_METHODS} | {E.IDENTITY}


def test_seed7_regression_constants(corpus7, seed7):
    model, enc = seed7
    _, test_ds = corpus7
    # recorded from the first correct run
    assert E.accuracy(model, test_ds, enc) == 95 / 96
    rob = E.robustness(model, test_ds, {Method.PRINT_ADDING}, 1, rng_for(7, "robust"), enc)
    assert rob == 90 / 96


def test_rank_methods():
    good, poor = E.rank_methods({"a": 0.9, "b": 0.8, "c": 0.7, "d": 0.6})
    assert good == {"a", "b"} and poor == {"c", "d"}
    good, poor = E.rank_methods({"d": 0.5, "c": 0.5, "b": 0.5, "a": 0.5})
    assert good == {"a", "b"}
    good, poor = E.rank_methods({m: 0.5 for m in ALL_METHODS})
    assert (len(good), len(poor)) == (9, 8)
    first = sorted(m.kebab for m in ALL_METHODS)[:9]
    assert {m.kebab for m in good} == set(first)


@pytest.mark.parametrize("x,expected", [
    (0.123449, "12.34"), (0.5, "50.00"), (1.0, "100.00"), (0.0, "0.00"),
    (0.0012345, "0.12"), (0.00125, "0.12"), (0.00135, "0.14"), (0.00145, "0.14"),
    (0.98958333, "98.96"),
])
def test_pct_rounds_half_even(x, expected):
    assert E.pct(x) == expected


def test_pct_ties():
    # exact decimal ties: 12.345% and 12.355% round to the even neighbour
    assert E.pct(0.12345) == "12.34"
    assert E.pct(0.12355) == "12.36"
    assert E.pct(float("nan")) == ""


def test_summarize_population_std():
    runs = [E.RunResult(s, a, r, {}, M.TrainTrace()) for s, a, r in ((1, 0.5, 0.4), (2, 0.7, 0.8))]
    rep = E.summarize(runs)
    assert rep.runs == 2 and rep.acc_mean == pytest.approx(0.6)
    assert rep.acc_std == pytest.approx(0.1) and rep.rob_std == pytest.approx(0.2)
    one = E.summarize(runs[:1])
    assert one.acc_std == 0.0 and one.rob_std == 0.0


def small_spec(**kw):
    base = dict(
        data=E.DataRef(generator=GeneratorSpec(3, 10, 1)),
        seeds=(1,), K=1, train=M.TrainConfig(epochs=2),
    )
    base.update(kw)
    return E.ExperimentSpec(**base)


def test_experiment_rows_and_order():
    rows = E.run_experiment(small_spec(seeds=(1, 2)))
    assert [r.cell.strategy for r in rows] == ["standard", "basic", "mixcode"]
    assert all(r.report.runs == 2 and r.status in ("ok", "degenerate") for r in rows)
    text = E.rows_to_csv(rows)
    lines = text.splitlines()
    assert lines[0] == ",".join(E.CSV_COLUMNS)
    assert lines[1].split(",")[3:6] == ["standard", "-", "-"]
    assert lines[3].split(",")[3:6] == ["mixcode", "0.1", "all"]


def test_single_seed_std_is_zero():
    rows = E.run_experiment(small_spec(strategies=("standard",)))
    assert rows[0].report.acc_std == 0.0 and rows[0].report.rob_std == 0.0


def test_alpha_and_strategy_grids():
    spec = E.preset("rq2-alpha", data=E.DataRef(generator=GeneratorSpec(3, 10, 1)))
    cells = spec.cells()
    assert [c.alpha for c in cells] == [0.05, 0.1, 0.2, 0.3, 0.4, 0.5]
    spec = E.preset("rq2-strategy")
    assert [c.strategy_label for c in spec.cells()] == [
        "mixcode-ori-ori", "mixcode", "mixcode-ref-ref"]
    assert len(E.preset("rq1").cells()) == 3
    assert len(E.preset("rq1", models=(M.BAG, M.SEQ)).cells()) == 6
    with pytest.raises(ValueError):
        E.preset("rq9")


def test_failed_cells_are_reported_not_raised(tmp_path):
    empty = Dataset([], "problem-classification", 3, "test")
    from mixcode.corpus import generate_classification, save_dataset

    train_ds, _ = generate_classification(GeneratorSpec(3, 10, 1))
    save_dataset(train_ds, tmp_path / "train.mpyds")
    save_dataset(empty, tmp_path / "test.mpyds")
    data = E.DataRef(train_path=str(tmp_path / "train.mpyds"), test_path=str(tmp_path / "test.mpyds"))
    rows = E.run_experiment(small_spec(data=data, strategies=("standard", "mixcode")))
    assert len(rows) == 2
    assert all(r.status == "failed" and r.report is None for r in rows)
    assert E.rows_to_csv(rows).splitlines()[1].endswith(",0,,,,,failed")


def test_rank_followup_adds_good_and_poor_rows():
    subsets = tuple(E.MethodSubset.single(m) for m in (Method.PLUS_ZERO, Method.DUPLICATION,
                                                       Method.PRINT_ADDING))
    spec = small_spec(strategies=("mixcode",), subsets=subsets, rank_followup=True)
    rows = E.run_experiment(spec)
    assert [r.cell.subset.name for r in rows] == ["plus-zero", "duplication", "print-adding",
                                                 "good", "poor"]
    assert len(rows[3].cell.subset.methods) == 2 and len(rows[4].cell.subset.methods) == 1


def test_experiment_spec_validation():
    with pytest.raises(ValueError):
        small_spec(seeds=(1, 1))
    with pytest.raises(ValueError):
        small_spec(K=0)
    assert small_spec(K=None).k == 5
    assert small_spec(K=None, data=E.DataRef(task="bug-detection")).k == 10


def test_trace_csv():
    rows = E.run_experiment(small_spec(strategies=("mixcode",)))
    text = E.trace_to_csv(rows[0].results)
    lines = text.splitlines()
    assert lines[0] == "run,epoch,loss,heldout_acc" and len(lines) == 3
    assert E.trace_name(rows[0]) == "trace_bag-fnn_mixcode_a0.1_all.csv"
    row = E.Row(E.Cell(M.BAG, "mixcode", 0.2, Pairing.REF_REF, E.ALL_SUBSET), "d", "t", None, "failed")
    assert E.trace_name(row) == "trace_bag-fnn_mixcode-ref-ref_a0.2_all.csv"
