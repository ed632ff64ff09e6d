"""Reference tree-walking interpreter for MiniPy.

The interpreter is the semantic oracle for refactoring: two programs are
considered equivalent on an input vector when their printed lines and
returned value agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from mixcode.lang import nodes as n
from mixcode.lang.builtins import BUILTINS

OK = "ok"
RUNTIME_ERROR = "runtime-error"
STEP_LIMIT = "step-limit-exceeded"

DEFAULT_STEP_LIMIT = 100_000
MAX_CALL_DEPTH = 200

_INT_MIN = -(2**63)
_INT_MAX = 2**63 - 1


class MiniPyRuntimeError(Exception):
    """Raised inside the interpreter; surfaced as an ExecResult outcome."""

    def __init__(self, kind: str, detail: str = ""):
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind


class StepLimitExceeded(Exception):
    pass


@dataclass(frozen=True)
class ExecResult:
    printed: tuple = ()
    returned: Any = None
    steps_used: int = 0
    outcome: str = OK
    error: Optional[str] = None  # runtime error kind when outcome is runtime-error

    def observable(self) -> tuple:
        """What semantic-preservation checks compare."""
        return (self.printed, _typed(self.returned), self.outcome, self.error)


def _typed(v):
    # True == 1 in Python, but not in MiniPy
    return (type(v).__name__, v)


def format_value(v) -> str:
    if v is None:
        return "None"
    if v is True:
        return "True"
    if v is False:
        return "False"
    return str(v)


_RETURN = object()


class _Frame:
    __slots__ = ("vars", "ret")

    def __init__(self, variables: dict):
        self.vars = variables
        self.ret = None


class _Machine:
    def __init__(self, program: n.Program, inputs, step_limit: int):
        self.funcs = {f.name: f for f in program.functions}
        self.inputs = list(inputs)
        self.next_input = 0
        self.limit = step_limit
        self.steps = 0
        self.printed: list[str] = []
        self.depth = 0

    def tick(self) -> None:
        if self.steps >= self.limit:
            raise StepLimitExceeded
        self.steps += 1

    # statements return _RETURN when a return statement fired
    def run_block(self, block: tuple, frame: _Frame):
        for s in block:
            if self.exec_stmt(s, frame) is _RETURN:
                return _RETURN
        return None

    def exec_stmt(self, s, frame: _Frame):
        self.tick()
        if isinstance(s, n.Assign):
            frame.vars[s.target] = self.eval(s.value, frame)
        elif isinstance(s, n.AugAssign):
            cur = self.lookup(s.target, frame)
            frame.vars[s.target] = self.arith(s.op, cur, self.eval(s.value, frame))
        elif isinstance(s, n.Print):
            vals = [self.eval(a, frame) for a in s.args]
            self.printed.append(" ".join(format_value(v) for v in vals))
        elif isinstance(s, n.If):
            for test, body in s.branches:
                if self.truth(self.eval(test, frame)):
                    return self.run_block(body, frame)
            if s.orelse is not None:
                return self.run_block(s.orelse, frame)
        elif isinstance(s, n.While):
            while self.truth(self.eval(s.test, frame)):
                if self.run_block(s.body, frame) is _RETURN:
                    return _RETURN
                self.tick()
        elif isinstance(s, n.For):
            start = 0 if s.start is None else self.int_of(self.eval(s.start, frame))
            stop = self.int_of(self.eval(s.stop, frame))
            for i in range(start, stop):
                frame.vars[s.var] = i
                if self.run_block(s.body, frame) is _RETURN:
                    return _RETURN
                self.tick()
        elif isinstance(s, n.Return):
            frame.ret = None if s.value is None else self.eval(s.value, frame)
            return _RETURN
        elif isinstance(s, n.ExprStmt):
            self.eval(s.expr, frame)
        elif isinstance(s, n.Pass):
            pass
        else:
            raise TypeError(f"unknown statement {s!r}")
        return None

    def lookup(self, name: str, frame: _Frame):
        try:
            return frame.vars[name]
        except KeyError:
            raise MiniPyRuntimeError("unknown-name", name) from None

    @staticmethod
    def truth(v) -> bool:
        if v is True or v is False:
            return v
        raise MiniPyRuntimeError("type-mismatch", f"condition is {format_value(v)}")

    @staticmethod
    def int_of(v) -> int:
        if type(v) is not int:
            raise MiniPyRuntimeError("type-mismatch", f"expected integer, got {format_value(v)}")
        return v

    def arith(self, op: str, a, b) -> int:
        a = self.int_of(a)
        b = self.int_of(b)
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op == "//":
            if b == 0:
                raise MiniPyRuntimeError("division-by-zero")
            r = a // b
        elif op == "%":
            if b == 0:
                raise MiniPyRuntimeError("division-by-zero")
            r = a % b
        else:
            raise MiniPyRuntimeError("type-mismatch", op)
        return _checked(r)

    def eval(self, e, frame: _Frame):
        t = type(e)
        if t is n.Int:
            return e.value
        if t is n.Name:
            return self.lookup(e.id, frame)
        if t is n.BinOp:
            op = e.op
            if op == "and":
                return self.truth(self.eval(e.left, frame)) and self.truth(self.eval(e.right, frame))
            if op == "or":
                return self.truth(self.eval(e.left, frame)) or self.truth(self.eval(e.right, frame))
            a = self.eval(e.left, frame)
            b = self.eval(e.right, frame)
            if op == "==":
                return type(a) is type(b) and a == b
            if op == "!=":
                return not (type(a) is type(b) and a == b)
            if op in ("<", "<=", ">", ">="):
                a = self.int_of(a)
                b = self.int_of(b)
                if op == "<":
                    return a < b
                if op == "<=":
                    return a <= b
                if op == ">":
                    return a > b
                return a >= b
            return self.arith(op, a, b)
        if t is n.Paren:
            return self.eval(e.expr, frame)
        if t is n.Call:
            return self.call(e, frame)
        if t is n.UnaryOp:
            v = self.eval(e.operand, frame)
            if e.op == "not":
                return not self.truth(v)
            return _checked(-self.int_of(v))
        if t is n.IfExp:
            if self.truth(self.eval(e.test, frame)):
                return self.eval(e.body, frame)
            return self.eval(e.orelse, frame)
        if t is n.Input:
            if self.next_input >= len(self.inputs):
                raise MiniPyRuntimeError("input-exhausted")
            v = self.inputs[self.next_input]
            self.next_input += 1
            return v
        if t is n.Str or t is n.Bool:
            return e.value
        if t is n.NoneLit:
            return None
        raise TypeError(f"unknown expression {e!r}")

    def call(self, e: n.Call, frame: _Frame):
        args = [self.eval(a, frame) for a in e.args]
        if "." in e.func:
            entry = BUILTINS.get(e.func)
            if entry is None or entry[0] != len(args):
                raise MiniPyRuntimeError("unknown-name", e.func)
            try:
                return _checked(entry[1](*[self.int_of(a) for a in args]))
            except ZeroDivisionError:
                raise MiniPyRuntimeError("division-by-zero") from None
        fn = self.funcs.get(e.func)
        if fn is None or not fn.required <= len(args) <= len(fn.params):
            raise MiniPyRuntimeError("unknown-name", e.func)
        local = {}
        for i, p in enumerate(fn.params):
            local[p.name] = args[i] if i < len(args) else p.default
        if self.depth >= MAX_CALL_DEPTH:
            raise MiniPyRuntimeError("call-depth", e.func)
        self.depth += 1
        callee = _Frame(local)
        self.run_block(fn.body, callee)
        self.depth -= 1
        return callee.ret


def _checked(v: int) -> int:
    if v < _INT_MIN or v > _INT_MAX:
        raise MiniPyRuntimeError("overflow")
    return v


def interpret(program: n.Program, inputs=(), step_limit: int = DEFAULT_STEP_LIMIT) -> ExecResult:
    """Run ``program`` on ``inputs``; never raises for MiniPy-level failures.

    One step is charged per executed statement and per extra loop-header
    evaluation, so ``while True: pass`` exhausts any finite limit.
    """
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    m = _Machine(program, inputs, step_limit)
    frame = _Frame({})
    try:
        m.run_block(program.body, frame)
    except MiniPyRuntimeError as err:
        return ExecResult(tuple(m.printed), None, m.steps, RUNTIME_ERROR, err.kind)
    except StepLimitExceeded:
        return ExecResult(tuple(m.printed), None, m.steps, STEP_LIMIT)
    return ExecResult(tuple(m.printed), frame.ret, m.steps, OK)
