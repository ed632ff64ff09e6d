"""Recursive-descent parser for MiniPy with definite-assignment validation."""

from __future__ import annotations

from typing import Optional

from mixcode.lang import nodes as n
from mixcode.lang.builtins import BUILTINS
from mixcode.lang.lexer import (
    DEDENT, IDENTIFIER, INDENT, INTEGER, KEYWORD, NEWLINE, OPERATOR,
    PUNCTUATION, STRING, Token, tokenize,
)


class ParseError(ValueError):
    def __init__(self, line: int, expected: str, found: str):
        super().__init__(f"line {line}: expected {expected}, found {found}")
        self.line = line
        self.expected = expected
        self.found = found


_EOF = Token("eof", "<eof>", 0)
_AUG = {"+=": "+", "-=": "-", "*=": "*"}

# Assigned-variable state used by the validator. ``None`` marks unreachable
# code (after a return), where every name counts as assigned.
State = Optional[set]


def _meet(states: list) -> State:
    live = [s for s in states if s is not None]
    if not live:
        return None
    out = set(live[0])
    for s in live[1:]:
        out &= s
    return out


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0
        self.calls: list[tuple[str, int, int]] = []

    # -- token helpers --

    def peek(self, k: int = 0) -> Token:
        i = self.pos + k
        return self.toks[i] if i < len(self.toks) else _EOF

    def line(self) -> int:
        t = self.peek()
        if t is _EOF:
            return self.toks[-1].line if self.toks else 1
        return t.line

    def at(self, lexeme: str, kind: Optional[str] = None) -> bool:
        t = self.peek()
        return t.lexeme == lexeme and (kind is None or t.kind == kind) and t.kind not in (STRING,)

    def fail(self, expected: str):
        t = self.peek()
        found = t.kind if t.kind in (NEWLINE, INDENT, DEDENT, "eof") else repr(t.lexeme)
        raise ParseError(self.line(), expected, found)

    def expect(self, lexeme: str) -> Token:
        if not self.at(lexeme):
            self.fail(repr(lexeme))
        t = self.peek()
        self.pos += 1
        return t

    def expect_kind(self, kind: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(kind)
        self.pos += 1
        return t

    # -- program --

    def program(self) -> n.Program:
        functions: list[n.FunctionDef] = []
        body: list = []
        state: State = set()
        while self.peek() is not _EOF:
            if self.at("def", KEYWORD):
                functions.append(self.funcdef())
            else:
                s, state = self.statement(state, in_function=False)
                body.append(s)
        seen = set()
        for fn in functions:
            if fn.name in seen:
                raise ParseError(0, "unique function name", repr(fn.name))
            seen.add(fn.name)
        prog = n.Program(tuple(functions), tuple(body))
        self.check_calls(prog)
        return prog

    def check_calls(self, prog: n.Program) -> None:
        for name, nargs, line in self.calls:
            if "." in name:
                if name not in BUILTINS:
                    raise ParseError(line, "known builtin API", repr(name))
                arity = BUILTINS[name][0]
                if nargs != arity:
                    raise ParseError(line, f"{arity} argument(s) to {name}", str(nargs))
                continue
            fn = prog.function(name)
            if fn is None:
                raise ParseError(line, "defined function", repr(name))
            if not fn.required <= nargs <= len(fn.params):
                raise ParseError(line, f"{fn.required}..{len(fn.params)} argument(s) to {name}", str(nargs))

    def funcdef(self) -> n.FunctionDef:
        self.expect("def")
        name = self.expect_kind(IDENTIFIER)
        if "." in name.lexeme:
            raise ParseError(name.line, "plain function name", repr(name.lexeme))
        self.expect("(")
        params: list[n.Param] = []
        while not self.at(")", PUNCTUATION):
            p = self.expect_kind(IDENTIFIER)
            if "." in p.lexeme or any(q.name == p.lexeme for q in params):
                raise ParseError(p.line, "distinct parameter name", repr(p.lexeme))
            default = None
            if self.at("=", OPERATOR):
                self.pos += 1
                sign = 1
                if self.at("-", OPERATOR):
                    self.pos += 1
                    sign = -1
                default = sign * int(self.expect_kind(INTEGER).lexeme)
            elif params and params[-1].default is not None:
                raise ParseError(p.line, "default value", "non-default parameter")
            params.append(n.Param(p.lexeme, default))
            if not self.at(")", PUNCTUATION):
                self.expect(",")
        self.expect(")")
        self.expect(":")
        body, _ = self.block({p.name for p in params}, in_function=True)
        return n.FunctionDef(name.lexeme, tuple(params), body)

    # -- statements --

    def block(self, state: State, in_function: bool):
        if not self.at("\n", NEWLINE):
            # single-line suite: ``if c: stmt``
            s, state = self.simple_statement(state, in_function)
            return (s,), state
        self.pos += 1
        self.expect_kind(INDENT)
        stmts = []
        while self.peek().kind != DEDENT:
            if self.peek() is _EOF:
                self.fail("dedent")
            if self.at("def", KEYWORD):
                self.fail("statement (nested def not supported)")
            s, state = self.statement(state, in_function)
            stmts.append(s)
        self.pos += 1
        return tuple(stmts), state

    def statement(self, state: State, in_function: bool):
        t = self.peek()
        if t.kind == KEYWORD:
            if t.lexeme == "if":
                return self.if_stmt(state, in_function)
            if t.lexeme == "while":
                self.pos += 1
                test = self.expr(state)
                self.expect(":")
                body, _ = self.block(None if state is None else set(state), in_function)
                return n.While(test, body), state
            if t.lexeme == "for":
                return self.for_stmt(state, in_function)
            if t.lexeme in ("elif", "else"):
                self.fail("statement")
        if t.kind in (INDENT, DEDENT):
            self.fail("statement")
        return self.simple_statement(state, in_function)

    def simple_statement(self, state: State, in_function: bool):
        t = self.peek()
        if t.kind == KEYWORD and t.lexeme == "pass":
            self.pos += 1
            self.end_line()
            return n.Pass(), state
        if t.kind == KEYWORD and t.lexeme == "return":
            self.pos += 1
            value = None
            if not self.at("\n", NEWLINE):
                value = self.expr(state)
            self.end_line()
            return n.Return(value), None
        if t.kind == KEYWORD and t.lexeme == "print":
            self.pos += 1
            self.expect("(")
            args = self.arglist(state)
            self.end_line()
            return n.Print(args), state
        if t.kind == IDENTIFIER and "." not in t.lexeme:
            nxt = self.peek(1)
            if nxt.kind == OPERATOR and nxt.lexeme == "=":
                self.pos += 2
                value = self.expr(state)
                self.end_line()
                if state is not None:
                    state = state | {t.lexeme}
                return n.Assign(t.lexeme, value), state
            if nxt.kind == OPERATOR and nxt.lexeme in _AUG:
                self.check_name(t, state)
                self.pos += 2
                value = self.expr(state)
                self.end_line()
                return n.AugAssign(t.lexeme, _AUG[nxt.lexeme], value), state
        if t.kind in (NEWLINE, INDENT, DEDENT) or t is _EOF:
            self.fail("statement")
        e = self.expr(state)
        self.end_line()
        return n.ExprStmt(e), state

    def end_line(self) -> None:
        if self.peek() is _EOF:
            return
        self.expect_kind(NEWLINE)

    def if_stmt(self, state: State, in_function: bool):
        self.expect("if")
        branches = []
        outs = []
        test = self.expr(state)
        self.expect(":")
        body, out = self.block(None if state is None else set(state), in_function)
        branches.append((test, body))
        outs.append(out)
        while self.at("elif", KEYWORD):
            self.pos += 1
            test = self.expr(state)
            self.expect(":")
            body, out = self.block(None if state is None else set(state), in_function)
            branches.append((test, body))
            outs.append(out)
        orelse = None
        if self.at("else", KEYWORD):
            self.pos += 1
            self.expect(":")
            orelse, out = self.block(None if state is None else set(state), in_function)
            outs.append(out)
        else:
            outs.append(state)
        return n.If(tuple(branches), orelse), _meet(outs)

    def for_stmt(self, state: State, in_function: bool):
        self.expect("for")
        var = self.expect_kind(IDENTIFIER)
        if "." in var.lexeme:
            raise ParseError(var.line, "loop variable", repr(var.lexeme))
        self.expect("in")
        self.expect("range")
        self.expect("(")
        first = self.expr(state)
        start, stop = None, first
        if self.at(",", PUNCTUATION):
            self.pos += 1
            start, stop = first, self.expr(state)
        self.expect(")")
        self.expect(":")
        inner = None if state is None else state | {var.lexeme}
        body, _ = self.block(inner, in_function)
        return n.For(var.lexeme, start, stop, body), state

    # -- expressions --

    def check_name(self, t: Token, state: State) -> None:
        if state is not None and t.lexeme not in state:
            raise ParseError(t.line, "assigned variable", repr(t.lexeme))

    def arglist(self, state: State) -> tuple:
        args = []
        while not self.at(")", PUNCTUATION):
            args.append(self.expr(state))
            if not self.at(")", PUNCTUATION):
                self.expect(",")
        self.expect(")")
        return tuple(args)

    def expr(self, state: State):
        body = self.or_expr(state)
        if self.at("if", KEYWORD):
            self.pos += 1
            test = self.or_expr(state)
            self.expect("else")
            orelse = self.expr(state)
            return n.IfExp(body, test, orelse)
        return body

    def or_expr(self, state: State):
        left = self.and_expr(state)
        while self.at("or", KEYWORD):
            self.pos += 1
            left = n.BinOp("or", left, self.and_expr(state))
        return left

    def and_expr(self, state: State):
        left = self.not_expr(state)
        while self.at("and", KEYWORD):
            self.pos += 1
            left = n.BinOp("and", left, self.not_expr(state))
        return left

    def not_expr(self, state: State):
        if self.at("not", KEYWORD):
            self.pos += 1
            return n.UnaryOp("not", self.not_expr(state))
        return self.comparison(state)

    def comparison(self, state: State):
        left = self.arith(state)
        t = self.peek()
        if t.kind == OPERATOR and t.lexeme in n.COMPARE_OPS:
            self.pos += 1
            right = self.arith(state)
            nxt = self.peek()
            if nxt.kind == OPERATOR and nxt.lexeme in n.COMPARE_OPS:
                self.fail("end of comparison (chained comparisons unsupported)")
            return n.BinOp(t.lexeme, left, right)
        return left

    def arith(self, state: State):
        left = self.term(state)
        while self.peek().kind == OPERATOR and self.peek().lexeme in n.ARITH_OPS:
            op = self.peek().lexeme
            self.pos += 1
            left = n.BinOp(op, left, self.term(state))
        return left

    def term(self, state: State):
        left = self.factor(state)
        while self.peek().kind == OPERATOR and self.peek().lexeme in n.TERM_OPS:
            op = self.peek().lexeme
            self.pos += 1
            left = n.BinOp(op, left, self.factor(state))
        return left

    def factor(self, state: State):
        if self.at("-", OPERATOR):
            self.pos += 1
            return n.UnaryOp("-", self.factor(state))
        return self.atom(state)

    def atom(self, state: State):
        t = self.peek()
        if t.kind == INTEGER:
            self.pos += 1
            return n.Int(int(t.lexeme))
        if t.kind == STRING:
            self.pos += 1
            return n.Str(t.lexeme[1:-1])
        if t.kind == KEYWORD:
            if t.lexeme in ("True", "False"):
                self.pos += 1
                return n.Bool(t.lexeme == "True")
            if t.lexeme == "None":
                self.pos += 1
                return n.NoneLit()
            if t.lexeme == "input":
                self.pos += 1
                self.expect("(")
                self.expect(")")
                return n.Input()
            self.fail("expression")
        if t.kind == IDENTIFIER:
            self.pos += 1
            if self.at("(", PUNCTUATION):
                self.pos += 1
                args = self.arglist(state)
                self.calls.append((t.lexeme, len(args), t.line))
                return n.Call(t.lexeme, args)
            if "." in t.lexeme:
                self.fail("'(' after builtin API name")
            self.check_name(t, state)
            return n.Name(t.lexeme)
        if t.kind == PUNCTUATION and t.lexeme == "(":
            self.pos += 1
            inner = self.expr(state)
            self.expect(")")
            return n.Paren(inner)
        self.fail("expression")


def parse(tokens: list[Token]) -> n.Program:
    """Build a validated Program from a token list."""
    return _Parser(list(tokens)).program()


def parse_source(source: str) -> n.Program:
    return parse(tokenize(source))
