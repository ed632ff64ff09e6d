"""Immutable AST for MiniPy.

Nodes are frozen dataclasses holding tuples, so structural equality is plain
``==`` and trees can be shared freely between transformed programs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class NoneLit:
    pass


@dataclass(frozen=True)
class Name:
    id: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "not" or "-"
    operand: "Expr"


@dataclass(frozen=True)
class IfExp:
    """``body if test else orelse``"""

    body: "Expr"
    test: "Expr"
    orelse: "Expr"


@dataclass(frozen=True)
class Call:
    func: str  # user function name, or dotted builtin such as ``api.add``
    args: tuple


@dataclass(frozen=True)
class Input:
    pass


@dataclass(frozen=True)
class Paren:
    expr: "Expr"


Expr = Union[Int, Str, Bool, NoneLit, Name, BinOp, UnaryOp, IfExp, Call, Input, Paren]


# --- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr


@dataclass(frozen=True)
class AugAssign:
    target: str
    op: str  # "+", "-" or "*"
    value: Expr


@dataclass(frozen=True)
class Print:
    args: tuple


@dataclass(frozen=True)
class If:
    branches: tuple  # ((test, body), ...) for ``if`` then each ``elif``
    orelse: Optional[tuple] = None


@dataclass(frozen=True)
class While:
    test: Expr
    body: tuple


@dataclass(frozen=True)
class For:
    var: str
    start: Optional[Expr]
    stop: Expr
    body: tuple


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr


@dataclass(frozen=True)
class Pass:
    pass


Stmt = Union[Assign, AugAssign, Print, If, While, For, Return, ExprStmt, Pass]


@dataclass(frozen=True)
class Param:
    name: str
    default: Optional[int] = None


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: tuple
    body: tuple

    @property
    def required(self) -> int:
        return sum(1 for p in self.params if p.default is None)


@dataclass(frozen=True)
class Program:
    functions: tuple = ()
    body: tuple = ()

    def function(self, name: str) -> Optional[FunctionDef]:
        for fn in self.functions:
            if fn.name == name:
                return fn
        return None


# --- precedence ------------------------------------------------------------

COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-")
TERM_OPS = ("*", "//", "%")

PREC_IFEXP = 0
PREC_OR = 1
PREC_AND = 2
PREC_NOT = 3
PREC_CMP = 4
PREC_ARITH = 5
PREC_TERM = 6
PREC_NEG = 7
PREC_ATOM = 8


def precedence(e: Expr) -> int:
    if isinstance(e, IfExp):
        return PREC_IFEXP
    if isinstance(e, BinOp):
        if e.op == "or":
            return PREC_OR
        if e.op == "and":
            return PREC_AND
        if e.op in COMPARE_OPS:
            return PREC_CMP
        if e.op in ARITH_OPS:
            return PREC_ARITH
        return PREC_TERM
    if isinstance(e, UnaryOp):
        return PREC_NOT if e.op == "not" else PREC_NEG
    return PREC_ATOM


def wrap(e: Expr, min_prec: int) -> Expr:
    """Parenthesize ``e`` if it binds looser than ``min_prec``.

    Builders must route operands through this so that rendering and
    re-parsing gives back the same tree.
    """
    if precedence(e) < min_prec:
        return Paren(e)
    return e


def binop(op: str, left: Expr, right: Expr) -> BinOp:
    """Build a binary node with the parentheses the grammar needs."""
    if op == "or":
        p = PREC_OR
    elif op == "and":
        p = PREC_AND
    elif op in COMPARE_OPS:
        # comparisons do not chain
        return BinOp(op, wrap(left, PREC_CMP + 1), wrap(right, PREC_CMP + 1))
    elif op in ARITH_OPS:
        p = PREC_ARITH
    else:
        p = PREC_TERM
    return BinOp(op, wrap(left, p), wrap(right, p + 1))


def neg(e: Expr) -> UnaryOp:
    return UnaryOp("-", wrap(e, PREC_NEG))


def not_(e: Expr) -> UnaryOp:
    return UnaryOp("not", wrap(e, PREC_NOT))


def ifexp(body: Expr, test: Expr, orelse: Expr) -> IfExp:
    return IfExp(wrap(body, PREC_OR), wrap(test, PREC_OR), orelse)


# --- traversal helpers -----------------------------------------------------

def iter_expr(e: Expr):
    """Pre-order walk over an expression tree."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, BinOp):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, UnaryOp):
            stack.append(node.operand)
        elif isinstance(node, IfExp):
            stack.append(node.orelse)
            stack.append(node.test)
            stack.append(node.body)
        elif isinstance(node, Call):
            stack.extend(reversed(node.args))
        elif isinstance(node, Paren):
            stack.append(node.expr)


def stmt_exprs(s: Stmt) -> tuple:
    """Expressions owned directly by a statement (not by nested blocks)."""
    if isinstance(s, (Assign, AugAssign)):
        return (s.value,)
    if isinstance(s, Print):
        return s.args
    if isinstance(s, If):
        return tuple(t for t, _ in s.branches)
    if isinstance(s, While):
        return (s.test,)
    if isinstance(s, For):
        return (s.stop,) if s.start is None else (s.start, s.stop)
    if isinstance(s, Return):
        return () if s.value is None else (s.value,)
    if isinstance(s, ExprStmt):
        return (s.expr,)
    return ()


def child_blocks(s: Stmt) -> list:
    """Nested statement blocks of ``s`` as ``(slot, block)`` pairs."""
    if isinstance(s, If):
        out = [(j, body) for j, (_, body) in enumerate(s.branches)]
        if s.orelse is not None:
            out.append(("else", s.orelse))
        return out
    if isinstance(s, (While, For)):
        return [("body", s.body)]
    return []


def iter_stmts(block: tuple):
    """Pre-order walk over every statement in ``block`` and its children."""
    for s in block:
        yield s
        for _, child in child_blocks(s):
            yield from iter_stmts(child)


def names_in_expr(e: Expr) -> set:
    return {n.id for n in iter_expr(e) if isinstance(n, Name)}
