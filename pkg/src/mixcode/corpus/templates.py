"""Problem templates for the synthetic classification corpus.

Each template renders MiniPy source for one problem in one of several
surface forms (loop vs. closed formula, for vs. while, operators vs.
``api.*`` calls, function vs. top-level code). Identifier names are drawn
from pools shared by all problems so that names alone never reveal the
label. Every variant of a problem prints the same lines on the problem's
probe inputs; the generator checks this with the interpreter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

FUNC_NAMES = ("solve", "compute", "run", "process", "helper", "check", "calc",
              "work", "go", "task", "answer", "evaluate")
INPUT_NAMES = ("n", "number", "value", "x", "limit", "size", "num", "amount", "k", "upper")
PAIR_NAMES = (("a", "b"), ("first", "second"), ("x", "y"), ("left", "right"),
              ("p", "q"), ("base", "exponent"), ("lhs", "rhs"), ("m", "n"))
ACC_NAMES = ("total", "result", "acc", "res", "output", "product", "count", "current", "temp", "out")
LOOP_NAMES = ("i", "j", "idx", "index", "step", "t", "c", "pos")


class Names:
    """Draws distinct identifiers for one program."""

    def __init__(self, rng):
        self.rng = rng
        self.taken: set = set()

    def pick(self, pool) -> str:
        free = [x for x in pool if x not in self.taken]
        name = free[int(self.rng.integers(len(free)))]
        self.taken.add(name)
        return name

    def pair(self) -> tuple:
        free = [p for p in PAIR_NAMES if not (set(p) & self.taken)]
        a, b = free[int(self.rng.integers(len(free)))]
        if self.rng.random() < 0.5:
            a, b = b, a
        self.taken.update((a, b))
        return a, b


def _coin(rng, p: float = 0.5) -> bool:
    return bool(rng.random() < p)


def _choice(rng, options):
    return options[int(rng.integers(len(options)))]


def _indent(lines, depth: int = 1) -> list:
    return ["    " * depth + ln for ln in lines]


def _inc(rng, var: str, amount: str) -> str:
    if _coin(rng):
        return f"{var} += {amount}"
    if _coin(rng, 0.2):
        return f"{var} = api.add({var}, {amount})"
    return f"{var} = {var} + {amount}"


def _dec(rng, var: str, amount: str = "1") -> str:
    if _coin(rng):
        return f"{var} -= {amount}"
    return f"{var} = {var} - {amount}"


def _mul(rng, var: str, factor: str) -> str:
    if _coin(rng, 0.4):
        return f"{var} *= {factor}"
    if _coin(rng, 0.25):
        return f"{var} = api.mul({var}, {factor})"
    return f"{var} = {var} * {factor}"


def _gt(rng, a: str, b: str) -> str:
    return f"{a} > {b}" if _coin(rng) else f"{b} < {a}"


def _program(rng, names: Names, params: list, body: list, inline_ok: bool = True,
             result_is_printed: bool = False, ret_var: str = "") -> str:
    """Assemble either ``def f(params): body`` + call, or top-level code.

    ``body`` is written against ``params`` and ends with ``return <expr>``
    unless ``result_is_printed`` (the body prints its own output).
    """
    reads = [f"{p} = input()" for p in params]
    guard = _coin(rng, 0.15)
    if inline_ok and _coin(rng, 0.3):
        # top level: ``return e`` becomes ``print(e)``
        lines = list(reads)
        for ln in body:
            stripped = ln.lstrip(" ")
            if stripped.startswith("return "):
                ln = ln[: len(ln) - len(stripped)] + f"print({stripped[7:]})"
            lines.append(ln)
        if guard:
            return "if True:\n" + "\n".join(_indent(lines)) + "\n"
        return "\n".join(lines) + "\n"
    fname = names.pick(FUNC_NAMES)
    call = f"{fname}({', '.join(params)})"
    src = [f"def {fname}({', '.join(params)}):"] + _indent(body) + [""]
    src += reads
    if result_is_printed:
        tail = call
    elif _coin(rng, 0.3):
        out = names.pick(ACC_NAMES)
        src.append(f"{out} = {call}")
        tail = f"print({out})"
    else:
        tail = f"print({call})"
    if guard:
        src += ["if True:", "    " + tail]
    else:
        src.append(tail)
    return "\n".join(src) + "\n"


# --- problems -------------------------------------------------------------------

def sum_to_n(rng) -> str:
    nm = Names(rng)
    n = nm.pick(INPUT_NAMES)
    acc = nm.pick(ACC_NAMES)
    i = nm.pick(LOOP_NAMES)
    form = int(rng.integers(4))
    if form == 0:
        body = [f"{acc} = 0", f"for {i} in range({n} + 1):", "    " + _inc(rng, acc, i), f"return {acc}"]
    elif form == 1:
        body = [f"{acc} = 0", f"for {i} in range(1, {n} + 1):", "    " + _inc(rng, acc, i), f"return {acc}"]
    elif form == 2:
        body = [f"{acc} = 0", f"{i} = 1", f"while {i} <= {n}:",
                "    " + _inc(rng, acc, i), "    " + _inc(rng, i, "1"), f"return {acc}"]
    else:
        expr = _choice(rng, [f"{n} * ({n} + 1) // 2", f"({n} * {n} + {n}) // 2",
                             f"api.mul({n}, {n} + 1) // 2"])
        body = [f"{acc} = {expr}", f"return {acc}"]
    return _program(rng, nm, [n], body)


def max_of_two(rng) -> str:
    nm = Names(rng)
    a, b = nm.pair()
    form = int(rng.integers(4))
    if form == 0:
        body = [f"if {_gt(rng, a, b)}:", f"    return {a}", "else:", f"    return {b}"]
        return _program(rng, nm, [a, b], body, inline_ok=False)
    if form == 1:
        body = [f"return {a} if {_gt(rng, a, b)} else {b}"]
    elif form == 2:
        body = [f"return api.max({a}, {b})"]
    else:
        m = nm.pick(ACC_NAMES)
        body = [f"{m} = {a}", f"if {_gt(rng, b, m)}:", f"    {m} = {b}", f"return {m}"]
    return _program(rng, nm, [a, b], body)


def parity(rng) -> str:
    nm = Names(rng)
    n = nm.pick(INPUT_NAMES)
    form = int(rng.integers(4))
    if form == 0:
        body = [f"if {n} % 2 == 0:", '    print("even")', "else:", '    print("odd")']
    elif form == 1:
        r = nm.pick(ACC_NAMES)
        body = [f"{r} = {n} % 2", f"if {r} == 1:", '    print("odd")', "else:", '    print("even")']
    elif form == 2:
        r = nm.pick(ACC_NAMES)
        body = [f"{r} = {n} - {n} // 2 * 2", f"if {r} != 0:", '    print("odd")', "else:", '    print("even")']
    else:
        body = [f'print("even" if api.mod({n}, 2) == 0 else "odd")']
    return _program(rng, nm, [n], body, result_is_printed=True)


def factorial(rng) -> str:
    nm = Names(rng)
    n = nm.pick(INPUT_NAMES)
    acc = nm.pick(ACC_NAMES)
    i = nm.pick(LOOP_NAMES)
    form = int(rng.integers(4))
    if form == 0:
        lo = _choice(rng, ["1", "2"])
        body = [f"{acc} = 1", f"for {i} in range({lo}, {n} + 1):", "    " + _mul(rng, acc, i), f"return {acc}"]
    elif form == 1:
        body = [f"{acc} = 1", f"while {n} > 1:", "    " + _mul(rng, acc, n), "    " + _dec(rng, n),
                f"return {acc}"]
    elif form == 2:
        body = [f"{acc} = 1", f"for {i} in range({n}):", "    " + _mul(rng, acc, f"({i} + 1)"), f"return {acc}"]
    else:
        body = [f"{acc} = 1", f"{i} = {n}", f"while {i} >= 1:", "    " + _mul(rng, acc, i),
                "    " + _dec(rng, i), f"return {acc}"]
    return _program(rng, nm, [n], body)


def triangular_check(rng) -> str:
    nm = Names(rng)
    n = nm.pick(INPUT_NAMES)
    t = nm.pick(ACC_NAMES)
    k = nm.pick(LOOP_NAMES)
    form = int(rng.integers(3))
    if form == 0:
        body = [f"{t} = 0", f"{k} = 0", f"while {t} < {n}:", "    " + _inc(rng, k, "1"),
                "    " + _inc(rng, t, k), f"return {t} == {n}"]
    elif form == 1:
        f = nm.pick(("found", "flag", "ok", "hit"))
        body = [f"{f} = False", f"for {k} in range({n} + 1):", f"    if {k} * ({k} + 1) // 2 == {n}:",
                f"        {f} = True", f"return {f}"]
    else:
        body = [f"{t} = 0", f"for {k} in range(1, {n} + 1):", "    " + _inc(rng, t, k),
                f"    if {t} == {n}:", "        return True", "return False"]
        return _program(rng, nm, [n], body, inline_ok=False)
    return _program(rng, nm, [n], body)


def countdown(rng) -> str:
    nm = Names(rng)
    n = nm.pick(INPUT_NAMES)
    i = nm.pick(LOOP_NAMES)
    form = int(rng.integers(3))
    if form == 0:
        body = [f"while {n} > 0:", f"    print({n})", "    " + _dec(rng, n), 'print("done")']
    elif form == 1:
        body = [f"for {i} in range({n}):", f"    print({n} - {i})", 'print("done")']
    else:
        body = [f"{i} = {n}", f"while {i} >= 1:", f"    print({i})", "    " + _dec(rng, i), 'print("done")']
    return _program(rng, nm, [n], body, result_is_printed=True)


def gcd(rng) -> str:
    nm = Names(rng)
    a, b = nm.pair()
    form = int(rng.integers(3))
    if form == 0:
        t = nm.pick(ACC_NAMES)
        mod = f"api.mod({a}, {b})" if _coin(rng, 0.25) else f"{a} % {b}"
        body = [f"while {b} != 0:", f"    {t} = {b}", f"    {b} = {mod}", f"    {a} = {t}", f"return {a}"]
    elif form == 1:
        body = [f"while {a} != {b}:", f"    if {_gt(rng, a, b)}:", "        " + _dec(rng, a, b),
                "    else:", "        " + _dec(rng, b, a), f"return {a}"]
    else:
        g = nm.pick(ACC_NAMES)
        d = nm.pick(LOOP_NAMES)
        body = [f"{g} = 1", f"for {d} in range(1, api.min({a}, {b}) + 1):",
                f"    if {a} % {d} == 0 and {b} % {d} == 0:", f"        {g} = {d}", f"return {g}"]
    return _program(rng, nm, [a, b], body)


def power(rng) -> str:
    nm = Names(rng)
    b, e = nm.pair()
    r = nm.pick(ACC_NAMES)
    i = nm.pick(LOOP_NAMES)
    form = int(rng.integers(3))
    if form == 0:
        body = [f"{r} = 1", f"for {i} in range({e}):", "    " + _mul(rng, r, b), f"return {r}"]
    elif form == 1:
        body = [f"{r} = 1", f"while {e} > 0:", "    " + _mul(rng, r, b), "    " + _dec(rng, e), f"return {r}"]
    else:
        body = [f"{r} = 1", f"while {e} > 0:", f"    if {e} % 2 == 1:", "        " + _mul(rng, r, b),
                "    " + _mul(rng, b, b), f"    {e} = {e} // 2", f"return {r}"]
    return _program(rng, nm, [b, e], body)


# --- plain-Python reference behaviour (printed lines per probe) -----------------

def _ref_sum(n):
    return [str(sum(range(n + 1)))]


def _ref_max(a, b):
    return [str(max(a, b))]


def _ref_parity(n):
    return ["even" if n % 2 == 0 else "odd"]


def _ref_factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return [str(out)]


def _ref_triangular(n):
    return [str(any(k * (k + 1) // 2 == n for k in range(n + 1)))]


def _ref_countdown(n):
    return [str(v) for v in range(n, 0, -1)] + ["done"]


def _ref_gcd(a, b):
    while b:
        a, b = b, a % b
    return [str(a)]


def _ref_power(b, e):
    return [str(b ** e)]


@dataclass(frozen=True)
class Problem:
    name: str
    make: Callable  # rng -> MiniPy source
    probes: tuple  # input vectors
    reference: Callable  # *inputs -> expected printed lines


PROBLEMS = (
    Problem("sum-to-n", sum_to_n, ((0,), (1,), (3,), (5,), (8,)), _ref_sum),
    Problem("max-of-two", max_of_two, ((3, 5), (7, 2), (4, 4), (0, 9), (6, 1)), _ref_max),
    Problem("parity", parity, ((0,), (1,), (4,), (7,), (10,)), _ref_parity),
    Problem("factorial", factorial, ((0,), (1,), (3,), (5,), (6,)), _ref_factorial),
    Problem("triangular-check", triangular_check, ((1,), (3,), (4,), (6,), (8,)), _ref_triangular),
    Problem("countdown", countdown, ((0,), (1,), (3,), (4,), (6,)), _ref_countdown),
    Problem("gcd", gcd, ((12, 8), (9, 6), (7, 3), (10, 5), (14, 21)), _ref_gcd),
    Problem("power", power, ((2, 3), (3, 2), (5, 0), (2, 5), (1, 7)), _ref_power),
)
