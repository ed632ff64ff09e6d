"""Epoch providers for the three training strategies and a one-call trainer.

standard -- the encoded originals, reshuffled every epoch
basic    -- one fresh random refactoring of every program per epoch
mixcode  -- the Mixup-augmented set built by ``mixup.EpochBuilder``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mixcode import model as M
from mixcode.mixup import EpochBuilder, MixPolicy
from mixcode.refactor import ALL_METHODS, Analysis, refactor_or_identity
from mixcode.represent import Encoder, encode_label
from mixcode.seeding import derive_seed, rng_for

STRATEGIES = ("standard", "basic", "mixcode")


class StandardProvider:
    def __init__(self, features: np.ndarray, labels, num_classes: int, rng):
        self.X = features
        self.T = np.stack([encode_label(int(y), num_classes) for y in labels])
        self.rng = rng

    def __call__(self, epoch: int):
        perm = self.rng.permutation(len(self.X))
        return self.X[perm], self.T[perm]


class BasicProvider:
    def __init__(self, programs, labels, num_classes: int, encoder: Encoder, methods, rng):
        self.programs = list(programs)
        self.encoder = encoder
        self.methods = tuple(m for m in ALL_METHODS if m in methods)
        self.base = encoder.encode_all(self.programs)
        self.T = np.stack([encode_label(int(y), num_classes) for y in labels])
        self.analyses = [Analysis(p) for p in self.programs]
        self.rng = rng

    def __call__(self, epoch: int):
        X = np.empty_like(self.base)
        for i, p in enumerate(self.programs):
            out = refactor_or_identity(p, self.methods, self.rng, analysis=self.analyses[i])
            X[i] = self.base[i] if out is p else self.encoder(out)
        perm = self.rng.permutation(len(X))
        return X[perm], self.T[perm]


class MixCodeProvider:
    """Builds the mixed set, then shuffles it as any Fit over a dataset would.

    Without the shuffle, batches would follow the original training order,
    which for generated corpora is grouped by class.
    """

    def __init__(self, builder: EpochBuilder, rng):
        self.builder = builder
        self.rng = rng
        self.last = None  # samples of the most recent epoch in batch order

    def __call__(self, epoch: int):
        built = self.builder.build(self.rng)
        order = self.rng.permutation(len(built))
        samples = [built[int(j)] for j in order]
        self.last = samples
        return (np.stack([s.features for s in samples]), np.stack([s.label for s in samples]))


@dataclass(frozen=True)
class RunSpec:
    """Everything that determines one training run."""

    model_kind: str = M.BAG
    strategy: str = "mixcode"
    policy: MixPolicy = field(default_factory=MixPolicy)
    config: M.TrainConfig = field(default_factory=M.TrainConfig)
    seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.model_kind not in M.KINDS:
            raise ValueError(f"unknown model kind {self.model_kind!r}")


def encoder_kind(model_kind: str) -> str:
    return "bag" if model_kind == M.BAG else "seq"


def init_for(encoder: Encoder, model_kind: str, num_classes: int, seed: int) -> M.Classifier:
    if model_kind == M.BAG:
        dims = {"input": encoder.vocab.size}
    else:
        dims = {"seq_len": encoder.seq_len, "vocab": encoder.vocab.size}
    return M.init(model_kind, dims, num_classes, derive_seed(seed, "init"))


def make_provider(spec: RunSpec, programs, labels, num_classes: int, encoder: Encoder,
                  features: Optional[np.ndarray] = None):
    rng = rng_for(spec.seed, "provider")
    if spec.strategy == "standard":
        X = encoder.encode_all(programs) if features is None else features
        return StandardProvider(X, labels, num_classes, rng)
    if spec.strategy == "basic":
        return BasicProvider(programs, labels, num_classes, encoder, spec.policy.methods, rng)
    builder = EpochBuilder(programs, labels, num_classes, encoder, spec.policy)
    return MixCodeProvider(builder, rng)


def train(spec: RunSpec, programs, labels, num_classes: int, encoder: Encoder,
          heldout: Optional[tuple] = None) -> tuple[M.Classifier, M.TrainTrace]:
    model = init_for(encoder, spec.model_kind, num_classes, spec.seed)
    provider = make_provider(spec, programs, labels, num_classes, encoder)
    return M.fit(model, provider, spec.config, heldout)
