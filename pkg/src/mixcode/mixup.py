"""Mixup of code representations and labels, and per-epoch augmented datasets."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from mixcode.refactor import ALL_METHODS, Analysis, Method, refactor_or_identity
from mixcode.represent import Encoder, encode_label


class InvalidAlpha(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


class Pairing(enum.Enum):
    ORI_ORI = "ori-ori"
    ORI_REF = "ori-ref"
    REF_REF = "ref-ref"

    @classmethod
    def parse(cls, name: str) -> "Pairing":
        key = name.strip().lower().replace("+", "-").replace("_", "-")
        for p in cls:
            if p.value == key:
                return p
        raise ValueError(f"unknown pairing strategy {name!r}")


# --- Beta(alpha, alpha) ---------------------------------------------------------

def _uniform_open(rng) -> float:
    u = rng.random()
    while u == 0.0:
        u = rng.random()
    return u


def _johnk(a: float, b: float, rng) -> float:
    # Jöhnk: X = U^(1/a), Y = V^(1/b), accept when X + Y <= 1. Done in log
    # space because U^(1/a) underflows for the small shapes used by Mixup.
    while True:
        lx = math.log(_uniform_open(rng)) / a
        ly = math.log(_uniform_open(rng)) / b
        m = lx if lx > ly else ly
        ls = m + math.log(math.exp(lx - m) + math.exp(ly - m))
        if ls <= 0.0:
            return math.exp(lx - ls)


def _gamma_mt(shape: float, rng) -> float:
    # Marsaglia & Tsang (2000), valid for shape >= 1
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = rng.standard_normal()
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = _uniform_open(rng)
        if u < 1.0 - 0.0331 * x ** 4:
            return d * v
        if math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
            return d * v


def sample_beta(a: float, b: float, rng) -> float:
    if a <= 0 or b <= 0 or not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidAlpha(f"Beta shapes must be positive and finite, got ({a}, {b})")
    if a <= 1.0 and b <= 1.0:
        return _johnk(a, b, rng)
    g1 = _gamma_mt(a, rng) if a >= 1.0 else _gamma_mt(a + 1.0, rng) * _uniform_open(rng) ** (1.0 / a)
    g2 = _gamma_mt(b, rng) if b >= 1.0 else _gamma_mt(b + 1.0, rng) * _uniform_open(rng) ** (1.0 / b)
    return g1 / (g1 + g2)


def sample_lambda(alpha: float, rng) -> float:
    """Draw the mixing weight from Beta(alpha, alpha)."""
    return sample_beta(alpha, alpha, rng)


# --- mixing ---------------------------------------------------------------------

def mix_features(a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ShapeMismatch(f"cannot mix shapes {a.shape} and {b.shape}")
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    return lam * a + (1.0 - lam) * b


def mix_labels(a: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    return mix_features(a, b, lam)


@dataclass(frozen=True)
class MixPolicy:
    alpha: float = 0.1
    pairing: Pairing = Pairing.ORI_REF
    methods: frozenset = frozenset(ALL_METHODS)
    # Forces every lambda to this value; used to check that Mixup collapses
    # to plain training when lambda == 1.
    fixed_lambda: Optional[float] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidAlpha(f"alpha must be > 0, got {self.alpha}")
        if self.pairing is not Pairing.ORI_ORI and not self.methods:
            raise ValueError("pairings with refactored code need at least one method")
        if self.fixed_lambda is not None and not 0.0 <= self.fixed_lambda <= 1.0:
            raise ValueError("fixed_lambda must lie in [0, 1]")

    def draw(self, rng) -> float:
        if self.fixed_lambda is not None:
            return self.fixed_lambda
        return sample_lambda(self.alpha, rng)


@dataclass(frozen=True)
class MixedSample:
    features: np.ndarray
    label: np.ndarray
    lambda_used: float
    first: int  # index of the shuffled original partner (x_s)
    second: int  # index of the positionally aligned partner (x_ref)


class EpochBuilder:
    """Builds one Mixup-augmented training set per call.

    Encodings and refactoring analyses of the original programs are cached
    across epochs; every random decision is still drawn from the caller's rng
    in the same order as a from-scratch build.
    """

    def __init__(self, programs, labels, num_classes: int, encoder: Encoder, policy: MixPolicy):
        self.programs = list(programs)
        self.labels = [int(y) for y in labels]
        if len(self.programs) != len(self.labels):
            raise ShapeMismatch("programs and labels differ in length")
        if len(self.programs) < 2:
            raise ValueError("Mixup needs at least two training programs")
        self.num_classes = num_classes
        self.encoder = encoder
        self.policy = policy
        self.base = encoder.encode_all(self.programs)
        self.onehot = np.stack([encode_label(y, num_classes) for y in self.labels])
        self._analyses: dict[int, Analysis] = {}
        self._methods = tuple(m for m in ALL_METHODS if m in policy.methods)

    def analysis(self, i: int) -> Analysis:
        a = self._analyses.get(i)
        if a is None:
            a = self._analyses[i] = Analysis(self.programs[i])
        return a

    def refactored(self, i: int, rng) -> np.ndarray:
        prog = refactor_or_identity(self.programs[i], self._methods, rng, analysis=self.analysis(i))
        if prog is self.programs[i]:
            return self.base[i]
        return self.encoder(prog)

    def build(self, rng) -> list[MixedSample]:
        n = len(self.programs)
        pairing = self.policy.pairing
        if pairing is Pairing.ORI_ORI:
            ref = self.base
        else:
            ref = [self.refactored(i, rng) for i in range(n)]
        perm = rng.permutation(n)
        out = []
        for i in range(n):
            s = int(perm[i])
            v_x = self.refactored(s, rng) if pairing is Pairing.REF_REF else self.base[s]
            lam = self.policy.draw(rng)
            out.append(MixedSample(
                features=mix_features(v_x, ref[i], lam),
                label=mix_labels(self.onehot[s], self.onehot[i], lam),
                lambda_used=lam,
                first=s,
                second=i,
            ))
        return out


def build_epoch_dataset(programs, labels, policy: MixPolicy, encoder: Encoder, rng,
                        num_classes: Optional[int] = None) -> list[MixedSample]:
    """One epoch of MixCode data: refactor, shuffle, then mix pairwise.

    For ``ori-ref`` every shuffled original is mixed with the positionally
    aligned refactored program; ``ori-ori`` skips refactoring and ``ref-ref``
    refactors the shuffled partner as well.
    """
    labels = list(labels)
    if num_classes is None:
        num_classes = max(labels) + 1
    return EpochBuilder(programs, labels, num_classes, encoder, policy).build(rng)
