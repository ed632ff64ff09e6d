"""Synthetic datasets and ``.mpyds`` persistence."""

from mixcode.corpus.dataset import (
    TASKS, Dataset, FormatError, Sample, dumps, load_dataset, loads, save_dataset,
)
from mixcode.corpus.generate import (
    GenerationFailed, GeneratorSpec, generate, generate_bug_detection,
    generate_classification, make_mutant, mutate, mutation_sites, observe,
)
from mixcode.corpus.templates import PROBLEMS

__all__ = [
    "PROBLEMS", "TASKS", "Dataset", "FormatError", "GenerationFailed",
    "GeneratorSpec", "Sample", "dumps", "generate", "generate_bug_detection",
    "generate_classification", "load_dataset", "loads", "make_mutant",
    "mutate", "mutation_sites", "observe", "save_dataset",
]
