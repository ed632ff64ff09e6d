from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from mixcode.corpus import (
    Dataset, FormatError, GeneratorSpec, Sample, dumps, generate_bug_detection,
    generate_classification, load_dataset, loads, make_mutant, mutate, mutation_sites, observe,
    save_dataset,
)
from mixcode.corpus.generate import GENERATION_STEP_LIMIT
from mixcode.corpus.templates import PROBLEMS
from mixcode.lang import interp as I
from mixcode.lang import interpret, parse_source, render


@pytest.fixture(scope="module")
def bugs():
    return generate_bug_detection(GeneratorSpec(8, 50, 7))


def test_classification_counts(corpus7):
    train, test = corpus7
    assert (len(train), len(test)) == (384, 96)
    assert Counter(train.labels) == {k: 48 for k in range(8)}
    assert Counter(test.labels) == {k: 12 for k in range(8)}
    assert train.split == "train" and test.split == "test"


def test_problem_names_and_probes():
    assert [p.name for p in PROBLEMS] == [
        "sum-to-n", "max-of-two", "parity", "factorial", "triangular-check", "countdown",
        "gcd", "power",
    ]
    assert all(len(p.probes) == 5 for p in PROBLEMS)


def test_programs_match_their_reference(corpus7_all):
    for s in corpus7_all:
        prob = PROBLEMS[s.label]
        assert s.probes == prob.probes
        for p in s.probes:
            r = interpret(s.program, p)
            assert r.outcome == I.OK
            assert list(r.printed) == prob.reference(*p)


def test_problems_share_behaviour_and_vary_in_form(corpus7_all):
    by_label: dict = {}
    for s in corpus7_all:
        by_label.setdefault(s.label, []).append(s)
    for label, group in by_label.items():
        assert len({observe(s.program, s.probes) for s in group}) == 1
        assert len({render(s.program) for s in group}) > len(group) // 2


def test_generation_is_byte_identical(tmp_path, corpus7):
    again = generate_classification(GeneratorSpec(8, 60, 7))
    for a, b in zip(corpus7, again):
        assert dumps(a) == dumps(b)
    other = generate_classification(GeneratorSpec(8, 60, 8))
    assert dumps(other[0]) != dumps(corpus7[0])


@pytest.mark.parametrize("kwargs", [
    {"num_problems": 1}, {"num_problems": 9}, {"programs_per_problem": 1}, {"mutation_rate": 0.0},
])
def test_generator_spec_validation(kwargs):
    with pytest.raises(ValueError):
        GeneratorSpec(**kwargs)


COUNTING = "n = input()\ncount = 0\nfor i in range(0, n):\n    count += 1\nprint(count)\n"
SUMMING = "n = input()\ntotal = 0\nfor i in range(0, n):\n    total += i\nprint(total)\n"


def start_plus_one(prog):
    (site,) = [s for s in mutation_sites(prog) if s[0] == "range" and s[3] == "start" and s[4] == 1]
    return mutate(prog, site)


def test_range_start_mutation_on_counting_template():
    prog = parse_source(COUNTING)
    mutant = start_plus_one(prog)
    assert "range(1, n)" in render(mutant)
    assert interpret(prog, [3]).printed == ("3",)
    assert interpret(mutant, [3]).printed == ("2",)


def test_range_start_mutation_is_equivalent_on_summing_template():
    # 0+1+2 and 1+2 agree, so this site never yields a bug for the summing form
    prog = parse_source(SUMMING)
    mutant = start_plus_one(prog)
    for n in range(6):
        assert interpret(mutant, [n]).printed == interpret(prog, [n]).printed


def test_make_mutant_changes_behaviour():
    prog = parse_source(COUNTING)
    probes = ((0,), (3,), (5,))
    rng = np.random.default_rng(0)
    for _ in range(10):
        m = make_mutant(prog, probes, rng)
        assert m is not None
        assert observe(m, probes) != observe(prog, probes)


def test_make_mutant_gives_up_without_sites():
    prog = parse_source("x = input()\nprint(api.max(x, x))\n")
    assert mutation_sites(prog) == []
    assert make_mutant(prog, ((1,),), np.random.default_rng(0)) is None
    # a site exists here but every mutation of it is invisible on the probe
    prog = parse_source("x = input()\nprint(api.max(x, 0))\n")
    assert make_mutant(prog, ((5,),), np.random.default_rng(0)) is None


def test_bug_detection_balance_and_mutants(bugs):
    train, test = bugs
    for ds in bugs:
        c = Counter(ds.labels)
        assert abs(c[0] - c[1]) <= 1
        assert ds.task == "bug-detection" and ds.num_classes == 2
    assert len(train) + len(test) == 800


def test_buggy_programs_terminate_and_differ(bugs):
    for ds in bugs:
        for s in ds.samples:
            seen = observe(s.program, s.probes, GENERATION_STEP_LIMIT)
            assert all(o == I.OK for _, o, _ in seen)
            problem = next(p for p in PROBLEMS if p.probes == s.probes)
            expected = [tuple(problem.reference(*p)) for p in s.probes]
            correct = [printed for printed, _, _ in seen] == expected
            assert correct == (s.label == 0)


def test_bug_detection_mutation_rate():
    train, test = generate_bug_detection(GeneratorSpec(2, 10, 3, mutation_rate=0.5))
    assert Counter(train.labels + test.labels) == {0: 10, 1: 10}


def test_round_trip(tmp_path, corpus7, bugs):
    for ds in (*corpus7, *bugs):
        path = tmp_path / "d.mpyds"
        save_dataset(ds, path)
        back = load_dataset(path)
        assert back == ds
        assert dumps(back) == path.read_text()


def test_file_format_layout(corpus7):
    text = dumps(Dataset(corpus7[0].samples[:2], "problem-classification", 8, "train"))
    lines = text.split("\n")
    assert lines[0] == "MPYDS v1 problem-classification 8 train"
    assert lines[1].startswith("### 0 0;1;3;5;8")
    assert lines[-2] == "END 2" and lines[-1] == ""


def test_header_without_split_defaults_to_train():
    ds = loads("MPYDS v1 bug-detection 2\n### 1 3,4;-\nprint(1)\n\nEND 1\n")
    assert ds.split == "train"
    assert ds.samples[0].probes == ((3, 4), ())


def test_truncated_file_raises(corpus7):
    text = dumps(corpus7[1])
    for cut in (len(text) // 2, len(text) - 8, 10):
        with pytest.raises(FormatError):
            loads(text[:cut])


@pytest.mark.parametrize("text,line", [
    ("MPYDS v2 bug-detection 2\nEND 0\n", 1),
    ("MPYDS v1 bug-detection 2\n### 5 1\nprint(1)\n\nEND 1\n", 2),
    ("MPYDS v1 bug-detection 2\n### 0 1\nprint(x)\n\nEND 1\n", 3),
    ("MPYDS v1 bug-detection 2\n### 0 1\nprint(1)\n\nEND 2\n", 5),
    ("MPYDS v1 bug-detection 2\nhello\n", 2),
])
def test_format_errors_carry_lines(text, line):
    with pytest.raises(FormatError) as ei:
        loads(text)
    assert ei.value.line == line


def test_empty_dataset_round_trips(tmp_path):
    ds = Dataset([], "problem-classification", 8, "test")
    save_dataset(ds, tmp_path / "e.mpyds")
    back = load_dataset(tmp_path / "e.mpyds")
    assert back == ds and len(back) == 0


def test_dataset_validation():
    prog = parse_source("print(1)\n")
    with pytest.raises(ValueError):
        Dataset([Sample(prog, 2, ((),))], "bug-detection", 2)
    with pytest.raises(ValueError):
        Dataset([Sample(prog, 0, ())], "bug-detection", 2)
