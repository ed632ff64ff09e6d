"""Datasets and the line-oriented ``.mpyds`` file format.

    MPYDS v1 <task> <num_classes> [<split>]
    ### <class-index> <probes>
    <program text, no blank lines>
    <blank line>
    ...
    END <sample-count>

Probes are separated by ``;`` and the integers of one probe by ``,``; a
probe without inputs is written ``-``. Blank lines inside rendered
programs are dropped on save, which the lexer ignores anyway. The ``END``
trailer makes truncation detectable even at a sample boundary.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from mixcode.lang import LexError, ParseError, parse_source, render
from mixcode.lang import nodes as n

TASKS = ("problem-classification", "bug-detection")
SPLITS = ("train", "test")
MAGIC = "MPYDS"
VERSION = "v1"


class FormatError(ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


@dataclass(frozen=True)
class Sample:
    program: n.Program
    label: int
    probes: tuple  # tuple of input tuples


@dataclass
class Dataset:
    samples: list = field(default_factory=list)
    task: str = "problem-classification"
    num_classes: int = 2
    split: str = "train"

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValueError(f"unknown task {self.task!r}")
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        for s in self.samples:
            if not 0 <= s.label < self.num_classes:
                raise ValueError(f"label {s.label} out of range for {self.num_classes} classes")
            if not s.probes:
                raise ValueError("every sample needs at least one probe input")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def programs(self) -> list:
        return [s.program for s in self.samples]

    @property
    def labels(self) -> list:
        return [s.label for s in self.samples]


def format_probes(probes) -> str:
    return ";".join(",".join(str(v) for v in p) if p else "-" for p in probes)


def parse_probes(text: str) -> tuple:
    out = []
    for part in text.split(";"):
        if part == "-":
            out.append(())
        else:
            out.append(tuple(int(v) for v in part.split(",")))
    return tuple(out)


def dumps(ds: Dataset) -> str:
    lines = [f"{MAGIC} {VERSION} {ds.task} {ds.num_classes} {ds.split}"]
    for s in ds.samples:
        lines.append(f"### {s.label} {format_probes(s.probes)}")
        lines.extend(ln for ln in render(s.program).split("\n") if ln.strip())
        lines.append("")
    lines.append(f"END {len(ds.samples)}")
    return "\n".join(lines) + "\n"


_HEADER = re.compile(r"MPYDS v1 (\S+) (\d+)(?: (\S+))?")
_SAMPLE = re.compile(r"### (\d+) (\S+)")


def loads(text: str) -> Dataset:
    lines = text.split("\n")
    m = _HEADER.fullmatch(lines[0]) if lines else None
    if m is None:
        raise FormatError(1, "expected header 'MPYDS v1 <task> <num_classes>'")
    task, num_classes, split = m.group(1), int(m.group(2)), m.group(3) or "train"
    if task not in TASKS:
        raise FormatError(1, f"unknown task {task!r}")
    if split not in SPLITS:
        raise FormatError(1, f"unknown split {split!r}")
    samples = []
    i = 1
    while True:
        if i >= len(lines):
            raise FormatError(i, "missing END trailer (truncated file?)")
        line = lines[i]
        if line.startswith("END"):
            if line != f"END {len(samples)}":
                raise FormatError(i + 1, f"trailer does not match {len(samples)} samples")
            if any(rest.strip() for rest in lines[i + 1:]):
                raise FormatError(i + 2, "content after END trailer")
            break
        sm = _SAMPLE.fullmatch(line)
        if sm is None:
            raise FormatError(i + 1, "expected '### <class-index> <probes>'")
        start = i + 1
        try:
            probes = parse_probes(sm.group(2))
        except ValueError:
            raise FormatError(i + 1, "malformed probe list") from None
        label = int(sm.group(1))
        if label >= num_classes:
            raise FormatError(i + 1, f"class index {label} >= {num_classes}")
        j = start
        while j < len(lines) and lines[j] != "":
            j += 1
        if j >= len(lines):
            raise FormatError(j, "sample is not terminated by a blank line")
        try:
            program = parse_source("\n".join(lines[start:j]) + "\n")
        except (LexError, ParseError) as e:
            raise FormatError(start + getattr(e, "line", 1), f"program does not parse: {e}") from None
        samples.append(Sample(program, label, probes))
        i = j + 1
    return Dataset(samples, task, num_classes, split)


def save_dataset(ds: Dataset, path) -> None:
    Path(path).write_text(dumps(ds), encoding="utf-8", newline="\n")


def load_dataset(path) -> Dataset:
    return loads(Path(path).read_text(encoding="utf-8"))
