"""Synthetic corpora: problem classification and bug detection."""

from __future__ import annotations

from dataclasses import dataclass

from mixcode.corpus.dataset import Dataset, Sample
from mixcode.corpus.templates import PROBLEMS, Problem
from mixcode.lang import interp as I
from mixcode.lang import nodes as n
from mixcode.lang import parse_source
from mixcode.refactor.methods import edit_block, iter_blocks, map_block
from mixcode.seeding import rng_for

MAX_MUTATION_RETRIES = 20
TEST_FRACTION = 0.2
# Every template finishes its probes in a few hundred steps; a mutant that
# needs more is treated as non-terminating and rejected.
GENERATION_STEP_LIMIT = 5_000


class GenerationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    num_problems: int = 8
    programs_per_problem: int = 60
    seed: int = 7
    mutation_rate: float = 1.0  # bug task: mutants per correct base program

    def __post_init__(self):
        if not 2 <= self.num_problems <= len(PROBLEMS):
            raise ValueError(f"num_problems must lie in [2, {len(PROBLEMS)}]")
        if self.programs_per_problem < 2:
            raise ValueError("programs_per_problem must be >= 2")
        if not 0.0 < self.mutation_rate <= 1.0:
            raise ValueError("mutation_rate must lie in (0, 1]")


def observe(program: n.Program, probes, step_limit: int = GENERATION_STEP_LIMIT) -> tuple:
    """Printed output and outcome on every probe; what 'same behaviour' means here."""
    out = []
    for p in probes:
        r = I.interpret(program, p, step_limit)
        out.append((r.printed, r.outcome, r.error))
    return tuple(out)


def _clean(observed: tuple) -> bool:
    return all(outcome == I.OK for _, outcome, _ in observed)


def _instances(spec: GeneratorSpec, count: int, tag: str) -> list:
    """``count`` verified programs for each of the first ``num_problems`` templates."""
    rng = rng_for(spec.seed, tag)
    out = []
    for label, prob in enumerate(PROBLEMS[: spec.num_problems]):
        for _ in range(count):
            out.append((_verified(prob, rng), label, prob))
    return out


def reference_outputs(prob: Problem) -> tuple:
    """Expected observation on the problem's probes, from its Python reference."""
    return tuple((tuple(prob.reference(*p)), I.OK, None) for p in prob.probes)


def _verified(prob: Problem, rng) -> n.Program:
    """Draw one variant and check it against the problem's reference outputs."""
    prog = parse_source(prob.make(rng))
    if observe(prog, prob.probes) != reference_outputs(prob):
        raise GenerationFailed(f"{prob.name}: variant disagrees with the reference outputs")
    return prog


def _split(items: list, key, rng) -> tuple[list, list]:
    """Stratified split: the last 20% (rounded) of each shuffled stratum is test."""
    groups: dict = {}
    for it in items:
        groups.setdefault(key(it), []).append(it)
    train, test = [], []
    for k in sorted(groups):
        g = groups[k]
        order = rng.permutation(len(g))
        n_test = int(round(len(g) * TEST_FRACTION))
        cut = len(g) - n_test
        train.extend(g[i] for i in sorted(order[:cut]))
        test.extend(g[i] for i in sorted(order[cut:]))
    return train, test


def generate_classification(spec: GeneratorSpec) -> tuple[Dataset, Dataset]:
    items = _instances(spec, spec.programs_per_problem, "classification")
    train, test = _split(items, lambda it: it[1], rng_for(spec.seed, "split"))

    def build(part, split):
        samples = [Sample(prog, label, prob.probes) for prog, label, prob in part]
        return Dataset(samples, "problem-classification", spec.num_problems, split)
    return build(train, "train"), build(test, "test")


# --- mutation -----------------------------------------------------------------------

# comparison replacements: toggle strictness or reverse the direction
_FLIP = {"<": ("<=", ">"), "<=": ("<", ">="), ">": (">=", "<"), ">=": (">", "<="),
         "==": ("!=",), "!=": ("==",)}


def _map_program(program: n.Program, fe) -> n.Program:
    fns = tuple(n.FunctionDef(f.name, f.params, map_block(f.body, fe)) for f in program.functions)
    return n.Program(fns, map_block(program.body, fe))


def _count(program: n.Program, pred) -> int:
    hits = [0]

    def fe(e):
        if pred(e):
            hits[0] += 1
        return e
    _map_program(program, fe)
    return hits[0]


def _replace_kth(program: n.Program, pred, k: int, repl) -> n.Program:
    seen = [0]

    def fe(e):
        if pred(e):
            seen[0] += 1
            if seen[0] - 1 == k:
                return repl(e)
        return e
    return _map_program(program, fe)


def _is_cmp(e) -> bool:
    return isinstance(e, n.BinOp) and e.op in _FLIP


def _is_int(e) -> bool:
    return isinstance(e, n.Int)


def mutation_sites(program: n.Program) -> list:
    """Every single-point mutation.

    ('cmp', k, op) replaces the k-th comparison's operator, ('const', k, delta)
    perturbs the k-th integer literal and ('range', path, idx, part, delta)
    moves a range bound by one.
    """
    sites = []
    cmp_ops = []
    _map_program(program, lambda e: (cmp_ops.append(e.op) if _is_cmp(e) else None, e)[1])
    for k, op in enumerate(cmp_ops):
        sites.extend(("cmp", k, new) for new in _FLIP[op])
    for k in range(_count(program, _is_int)):
        sites.append(("const", k, 1))
        sites.append(("const", k, -1))
    for path, block in iter_blocks(program):
        for idx, s in enumerate(block):
            if isinstance(s, n.For):
                for delta in (1, -1):
                    sites.append(("range", path, idx, "stop", delta))
                    sites.append(("range", path, idx, "start", delta))
    return sites


def _shift(e, delta: int):
    if isinstance(e, n.Int) and e.value + delta >= 0:
        return n.Int(e.value + delta)
    return n.binop("+" if delta > 0 else "-", e, n.Int(abs(delta)))


def mutate(program: n.Program, site) -> n.Program:
    kind = site[0]
    if kind == "cmp":
        return _replace_kth(program, _is_cmp, site[1], lambda e: n.BinOp(site[2], e.left, e.right))
    if kind == "const":
        _, k, delta = site

        def repl(e):
            v = e.value + delta
            return n.Int(v) if v >= 0 else n.Int(e.value + 1)
        return _replace_kth(program, _is_int, k, repl)
    _, path, idx, part, delta = site

    def edit(block):
        s = block[idx]
        if part == "stop":
            s = n.For(s.var, s.start, _shift(s.stop, delta), s.body)
        else:
            s = n.For(s.var, _shift(s.start if s.start is not None else n.Int(0), delta), s.stop, s.body)
        return block[:idx] + (s,) + block[idx + 1:]
    return edit_block(program, path, edit)


def make_mutant(program: n.Program, probes, rng, budget: int = MAX_MUTATION_RETRIES):
    """A single-point mutant that still runs cleanly but changes some probe output.

    Sites are tried in random order without repetition; returns None when
    ``budget`` attempts (or all sites) are used up.
    """
    sites = mutation_sites(program)
    reference = observe(program, probes)
    for k in rng.permutation(len(sites))[:budget]:
        mutant = mutate(program, sites[int(k)])
        seen = observe(mutant, probes)
        if _clean(seen) and seen != reference:
            return mutant
    return None


def generate_bug_detection(spec: GeneratorSpec) -> tuple[Dataset, Dataset]:
    """Correct programs (label 0) and single-mutation buggy variants (label 1).

    ``round(mutation_rate * N)`` of the N base slots are mutated; the same
    number of correct programs is kept, preferring slots that were not
    mutated, so classes stay balanced. A base whose mutations all leave
    its behaviour unchanged is replaced by a fresh variant of the same
    problem; every site tried and every redraw counts against the retry
    budget.
    """
    rng = rng_for(spec.seed, "bug-detection")
    per = spec.programs_per_problem
    total = per * spec.num_problems
    count = max(1, int(round(spec.mutation_rate * total)))
    chosen = set(rng.choice(total, size=count, replace=False).tolist())
    bases, mutants = [], {}
    for label, prob in enumerate(PROBLEMS[: spec.num_problems]):
        for j in range(per):
            slot = label * per + j
            prog = _verified(prob, rng)
            if slot in chosen:
                budget = MAX_MUTATION_RETRIES
                while True:
                    tried = min(budget, len(mutation_sites(prog)))
                    mutant = make_mutant(prog, prob.probes, rng, budget)
                    if mutant is not None:
                        break
                    budget -= max(tried, 1)
                    if budget <= 0:
                        raise GenerationFailed(
                            f"{prob.name}: no behaviour-changing mutation after {MAX_MUTATION_RETRIES} retries")
                    prog = _verified(prob, rng)
                mutants[slot] = (mutant, prob)
            bases.append((prog, prob))
    others = [i for i in range(total) if i not in chosen]
    correct = sorted((others + sorted(chosen))[:count])
    items = [(bases[i][0], 0, bases[i][1]) for i in correct]
    items += [(mutants[i][0], 1, mutants[i][1]) for i in sorted(chosen)]
    train, test = _split(items, lambda it: it[1], rng_for(spec.seed, "split"))

    def build(part, split):
        samples = [Sample(prog, label, prob.probes) for prog, label, prob in part]
        return Dataset(samples, "bug-detection", 2, split)
    return build(train, "train"), build(test, "test")


def generate(task: str, spec: GeneratorSpec) -> tuple[Dataset, Dataset]:
    if task in ("classification", "problem-classification"):
        return generate_classification(spec)
    if task in ("bug", "bug-detection"):
        return generate_bug_detection(spec)
    raise ValueError(f"unknown task {task!r}")


__all__ = ["GenerationFailed", "GeneratorSpec", "Problem", "generate", "generate_bug_detection",
           "generate_classification", "make_mutant", "mutate", "mutation_sites", "observe",
           "reference_outputs"]
