"""Code representations: vocabulary, bag-of-token vectors, soft one-hot sequences."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mixcode.lang import nodes as n
from mixcode.lang.render import lexemes

PAD = "<pad>"
UNK = "<unk>"
PAD_ID = 0
UNK_ID = 1

DEFAULT_MAX_VOCAB = 512
DEFAULT_SEQ_LEN = 64

# token classes that contribute to the bag representation
BAG_KINDS = frozenset({"keyword", "operator", "punctuation"})


@dataclass(frozen=True)
class Vocabulary:
    lexemes: tuple  # index -> lexeme; [0] is PAD, [1] is UNK
    token_to_id: dict = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        if self.lexemes[:2] != (PAD, UNK):
            raise ValueError("vocabulary must start with <pad>, <unk>")
        object.__setattr__(self, "token_to_id", {t: i for i, t in enumerate(self.lexemes)})

    @property
    def size(self) -> int:
        return len(self.lexemes)

    @property
    def pad_id(self) -> int:
        return PAD_ID

    @property
    def unk_id(self) -> int:
        return UNK_ID

    def id(self, lexeme: str) -> int:
        return self.token_to_id.get(lexeme, UNK_ID)

    def save(self, path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.lexemes), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(tuple(text.split("\n")[:-1]))


def build_vocab(corpus, max_size: int = DEFAULT_MAX_VOCAB) -> Vocabulary:
    """Keep the ``max_size`` most frequent lexemes (pad and unk included).

    Frequency ties are broken lexicographically. Layout tokens never enter
    the vocabulary.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if max_size < 2:
        raise ValueError("max_size must leave room for <pad> and <unk>")
    counts: Counter = Counter()
    for prog in corpus:
        counts.update(lex for _, lex in lexemes(prog))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [lex for lex, _ in ranked[: max_size - 2]]
    return Vocabulary((PAD, UNK, *kept))


def encode_bag(program: n.Program, vocab: Vocabulary) -> np.ndarray:
    """Relative frequencies of keyword/operator/punctuation tokens.

    Out-of-vocabulary counted tokens land in the unk bucket. A program with
    no counted tokens encodes to the zero vector.
    """
    vec = np.zeros(vocab.size)
    ids = vocab.token_to_id
    total = 0
    for kind, lex in lexemes(program):
        if kind in BAG_KINDS:
            vec[ids.get(lex, UNK_ID)] += 1.0
            total += 1
    if total:
        vec /= total
    return vec


def seq_ids(program: n.Program, vocab: Vocabulary, length: int = DEFAULT_SEQ_LEN) -> np.ndarray:
    ids = vocab.token_to_id
    out = np.full(length, PAD_ID, dtype=np.int64)
    toks = lexemes(program)[:length]
    out[: len(toks)] = [ids.get(lex, UNK_ID) for _, lex in toks]
    return out


def encode_seq(program: n.Program, vocab: Vocabulary, length: int = DEFAULT_SEQ_LEN) -> np.ndarray:
    """``length x vocab.size`` matrix of one-hot rows, padded or truncated."""
    if length < 1:
        raise ValueError("sequence length must be >= 1")
    m = np.zeros((length, vocab.size))
    m[np.arange(length), seq_ids(program, vocab, length)] = 1.0
    return m


def encode_label(class_index: int, num_classes: int) -> np.ndarray:
    if not 0 <= class_index < num_classes:
        raise IndexError(f"class {class_index} out of range for {num_classes} classes")
    y = np.zeros(num_classes)
    y[class_index] = 1.0
    return y


@dataclass(frozen=True)
class Encoder:
    """The representation T(.) bound to a vocabulary."""

    kind: str  # "bag" or "seq"
    vocab: Vocabulary
    seq_len: int = DEFAULT_SEQ_LEN

    def __post_init__(self):
        if self.kind not in ("bag", "seq"):
            raise ValueError(f"unknown encoder kind {self.kind!r}")

    @property
    def shape(self) -> tuple:
        if self.kind == "bag":
            return (self.vocab.size,)
        return (self.seq_len, self.vocab.size)

    def __call__(self, program: n.Program) -> np.ndarray:
        if self.kind == "bag":
            return encode_bag(program, self.vocab)
        return encode_seq(program, self.vocab, self.seq_len)

    def encode_all(self, programs) -> np.ndarray:
        programs = list(programs)
        out = np.empty((len(programs),) + self.shape)
        for i, p in enumerate(programs):
            out[i] = self(p)
        return out
