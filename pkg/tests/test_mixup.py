from __future__ import annotations

import hashlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixcode.lang import parse_source
from mixcode.mixup import (
    InvalidAlpha, MixPolicy, Pairing, ShapeMismatch, build_epoch_dataset, EpochBuilder,
    mix_features, mix_labels, sample_beta, sample_lambda,
)
from mixcode.refactor import Method
from mixcode.represent import Encoder, build_vocab

SOURCES = [
    "x = input()\nprint(x + 1)\n",
    "def f(a):\n    return a * 2\nprint(f(input()))\n",
    "for i in range(3):\n    print(i)\n",
    "x = input()\nif x > 0:\n    print(1)\nelse:\n    print(0)\n",
]


def small_set(n=4):
    progs = [parse_source(SOURCES[i % len(SOURCES)]) for i in range(n)]
    labels = [i % 2 for i in range(n)]
    return progs, labels, Encoder("bag", build_vocab(progs))


def test_mix_features_examples():
    assert np.allclose(mix_features([0.2, 0.8], [0.6, 0.4], 0.5), [0.4, 0.6])
    a = np.array([0.3, 0.7])
    assert np.array_equal(mix_features(a, [1.0, 0.0], 1.0), a)
    assert np.allclose(mix_features([1.0, 0.0], [0.0, 1.0], 0.2), [0.2, 0.8])


def test_mix_labels_examples():
    assert np.allclose(mix_labels([1, 0, 0], [0, 1, 0], 0.2), [0.2, 0.8, 0.0])
    a = np.array([0.1, 0.9])
    assert np.allclose(mix_labels(a, a, 0.37), a)
    assert np.array_equal(mix_labels([1.0, 0.0], [0.25, 0.75], 0.0), [0.25, 0.75])


def test_mix_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        mix_features([1.0, 0.0], [1.0, 0.0, 0.0], 0.5)
    with pytest.raises(ShapeMismatch):
        mix_labels(np.zeros((2, 2)), np.zeros(4), 0.5)
    with pytest.raises(ValueError):
        mix_features([1.0], [0.0], 1.5)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=8), st.data(), st.floats(0, 1))
def test_mix_symmetry_and_convexity(a, data, lam):
    b = data.draw(st.lists(st.floats(0, 1), min_size=len(a), max_size=len(a)))
    a, b = np.array(a), np.array(b)
    m = mix_features(a, b, lam)
    assert np.allclose(m, mix_features(b, a, 1 - lam), rtol=0, atol=1e-12)
    assert (m >= np.minimum(a, b) - 1e-12).all() and (m <= np.maximum(a, b) + 1e-12).all()


@pytest.mark.parametrize("alpha", [0, -1.0, float("nan"), float("inf")])
def test_invalid_alpha(alpha):
    with pytest.raises(InvalidAlpha):
        sample_lambda(alpha, np.random.default_rng(0))


def test_policy_validation():
    with pytest.raises(InvalidAlpha):
        MixPolicy(alpha=0.0)
    with pytest.raises(ValueError):
        MixPolicy(methods=frozenset())
    MixPolicy(pairing=Pairing.ORI_ORI, methods=frozenset())
    assert Pairing.parse("Ori+Ref") is Pairing.ORI_REF


def test_beta_moments_alpha_0_2():
    rng = np.random.default_rng(1)
    x = np.array([sample_lambda(0.2, rng) for _ in range(100_000)])
    assert ((x >= 0) & (x <= 1)).all()
    assert abs(x.mean() - 0.5) <= 0.01
    assert abs(x.var() - 1 / (4 * (2 * 0.2 + 1))) <= 0.005


@pytest.mark.parametrize("a,b", [(2.0, 3.0), (0.5, 4.0), (5.0, 5.0)])
def test_beta_general_shapes_mean(a, b):
    rng = np.random.default_rng(2)
    x = np.array([sample_beta(a, b, rng) for _ in range(40_000)])
    mean = a / (a + b)
    sd = math.sqrt(a * b / ((a + b) ** 2 * (a + b + 1)) / len(x))
    assert abs(x.mean() - mean) < 5 * sd


def test_lambda_one_collapse_two_programs():
    progs, labels, enc = small_set(2)
    policy = MixPolicy(alpha=0.1, fixed_lambda=1.0)
    out = build_epoch_dataset(progs, labels, policy, enc, np.random.default_rng(4))
    assert len(out) == 2
    for s in out:
        assert s.lambda_used == 1.0
        assert np.array_equal(s.features, enc(progs[s.first]))
        assert s.label[labels[s.first]] == 1.0


def test_single_program_rejected():
    progs, labels, enc = small_set(1)
    with pytest.raises(ValueError):
        build_epoch_dataset(progs, labels, MixPolicy(), enc, np.random.default_rng(0))


def digest(samples):
    h = hashlib.sha256()
    for s in samples:
        h.update(s.features.tobytes())
        h.update(s.label.tobytes())
        h.update(np.float64(s.lambda_used).tobytes())
        h.update(bytes([s.first, s.second]))
    return h.hexdigest()


def test_four_program_epoch_is_reproducible():
    progs, labels, enc = small_set(4)
    policy = MixPolicy(alpha=0.1, pairing=Pairing.ORI_REF)
    a = build_epoch_dataset(progs, labels, policy, enc, np.random.default_rng(2024))
    b = build_epoch_dataset(progs, labels, policy, enc, np.random.default_rng(2024))
    assert digest(a) == digest(b)
    # recorded from the first correct run
    assert digest(a) == RECORDED_DIGEST


RECORDED_DIGEST = "2b81a9d40654ac053f1fb83ea382f5c79d8ca84351c38fba3d099ab46a29dcd5"


def test_each_sample_uses_one_lambda():
    progs, labels, enc = small_set(8)
    b = EpochBuilder(progs, labels, 2, enc, MixPolicy(alpha=0.5))
    for s in b.build(np.random.default_rng(3)):
        # the label pins down lambda when the partners differ in class
        if labels[s.first] != labels[s.second]:
            assert s.label[labels[s.first]] == pytest.approx(s.lambda_used, abs=1e-15)
        assert s.label.sum() == pytest.approx(1.0, abs=1e-12)


def test_ori_ori_mixes_originals_only():
    progs, labels, enc = small_set(6)
    policy = MixPolicy(alpha=0.5, pairing=Pairing.ORI_ORI)
    for s in build_epoch_dataset(progs, labels, policy, enc, np.random.default_rng(5)):
        expect = mix_features(enc(progs[s.first]), enc(progs[s.second]), s.lambda_used)
        assert np.array_equal(s.features, expect)


def test_ref_ref_refactors_both_partners():
    progs, labels, enc = small_set(6)
    policy = MixPolicy(alpha=0.5, pairing=Pairing.REF_REF, fixed_lambda=1.0,
                       methods=frozenset({Method.PLUS_ZERO, Method.DEAD_IF_ADDING}))
    out = build_epoch_dataset(progs, labels, policy, enc, np.random.default_rng(6))
    # with lambda 1 only the shuffled partner is visible, and it has been refactored
    assert any(not np.array_equal(s.features, enc(progs[s.first])) for s in out)


def test_epoch_freshness(corpus7):
    train, _ = corpus7
    progs, labels = train.programs[:16], train.labels[:16]
    enc = Encoder("bag", build_vocab(train.programs))
    b = EpochBuilder(progs, labels, train.num_classes, enc, MixPolicy())
    rng = np.random.default_rng(8)
    e1, e2 = b.build(rng), b.build(rng)
    assert len(e1) == len(e2) == 16
    assert not all(np.array_equal(x.features, y.features) for x, y in zip(e1, e2))


def test_label_sums_on_swept_corpora():
    from mixcode.corpus import GeneratorSpec, generate_classification

    for seed in (1, 2):
        train, _ = generate_classification(GeneratorSpec(4, 10, seed))
        enc = Encoder("seq", build_vocab(train.programs), seq_len=24)
        out = build_epoch_dataset(train.programs, train.labels, MixPolicy(), enc,
                                  np.random.default_rng(seed), train.num_classes)
        assert len(out) == len(train.samples)
        for s in out:
            assert abs(s.label.sum() - 1.0) <= 1e-12
            assert np.allclose(s.features.sum(axis=1), 1.0)
