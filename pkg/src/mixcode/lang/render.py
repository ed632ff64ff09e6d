"""Canonical pretty-printer and AST-to-token-stream conversion."""

from __future__ import annotations

from mixcode.lang import nodes as n
from mixcode.lang.lexer import KEYWORD, KEYWORDS

INDENT = "    "


def render(program: n.Program) -> str:
    """Render ``program`` with 4-space indentation and spaced binary operators.

    Functions come first, each followed by a blank line, then the top-level
    statements. The output is a fixed point of tokenize -> parse -> render.
    """
    lines: list[str] = []
    for fn in program.functions:
        params = ", ".join(
            p.name if p.default is None else f"{p.name}={p.default}" for p in fn.params
        )
        lines.append(f"def {fn.name}({params}):")
        _block(fn.body, 1, lines)
        lines.append("")
    _block(program.body, 0, lines)
    if not lines:
        return ""
    if lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n"


def _block(block: tuple, depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    for s in block:
        if isinstance(s, n.If):
            for j, (test, body) in enumerate(s.branches):
                kw = "if" if j == 0 else "elif"
                out.append(f"{pad}{kw} {expr_text(test)}:")
                _block(body, depth + 1, out)
            if s.orelse is not None:
                out.append(f"{pad}else:")
                _block(s.orelse, depth + 1, out)
        elif isinstance(s, n.While):
            out.append(f"{pad}while {expr_text(s.test)}:")
            _block(s.body, depth + 1, out)
        elif isinstance(s, n.For):
            if s.start is None:
                bounds = expr_text(s.stop)
            else:
                bounds = f"{expr_text(s.start)}, {expr_text(s.stop)}"
            out.append(f"{pad}for {s.var} in range({bounds}):")
            _block(s.body, depth + 1, out)
        else:
            out.append(pad + simple_text(s))


def simple_text(s) -> str:
    if isinstance(s, n.Assign):
        return f"{s.target} = {expr_text(s.value)}"
    if isinstance(s, n.AugAssign):
        return f"{s.target} {s.op}= {expr_text(s.value)}"
    if isinstance(s, n.Print):
        return f"print({', '.join(expr_text(a) for a in s.args)})"
    if isinstance(s, n.Return):
        return "return" if s.value is None else f"return {expr_text(s.value)}"
    if isinstance(s, n.ExprStmt):
        return expr_text(s.expr)
    if isinstance(s, n.Pass):
        return "pass"
    raise TypeError(f"not a simple statement: {s!r}")


def expr_text(e) -> str:
    if isinstance(e, n.Int):
        return str(e.value)
    if isinstance(e, n.Str):
        q = "'" if '"' in e.value else '"'
        return f"{q}{e.value}{q}"
    if isinstance(e, n.Bool):
        return "True" if e.value else "False"
    if isinstance(e, n.NoneLit):
        return "None"
    if isinstance(e, n.Name):
        return e.id
    if isinstance(e, n.BinOp):
        return f"{expr_text(e.left)} {e.op} {expr_text(e.right)}"
    if isinstance(e, n.UnaryOp):
        if e.op == "not":
            return f"not {expr_text(e.operand)}"
        return f"-{expr_text(e.operand)}"
    if isinstance(e, n.IfExp):
        return f"{expr_text(e.body)} if {expr_text(e.test)} else {expr_text(e.orelse)}"
    if isinstance(e, n.Call):
        return f"{e.func}({', '.join(expr_text(a) for a in e.args)})"
    if isinstance(e, n.Input):
        return "input()"
    if isinstance(e, n.Paren):
        return f"({expr_text(e.expr)})"
    raise TypeError(f"not an expression: {e!r}")


# --- direct token stream -----------------------------------------------------
#
# Encoders need the token kinds of rendered programs thousands of times per
# epoch; walking the AST avoids a render + lex round trip. The stream matches
# the non-layout tokens of tokenize(render(p)) exactly (checked in tests).

def lexemes(program: n.Program) -> list[tuple[str, str]]:
    """``(kind, lexeme)`` pairs of the rendered program, layout tokens omitted."""
    out: list[tuple[str, str]] = []
    for fn in program.functions:
        out.append((KEYWORD, "def"))
        out.append(("identifier", fn.name))
        out.append(("punctuation", "("))
        for i, p in enumerate(fn.params):
            if i:
                out.append(("punctuation", ","))
            out.append(("identifier", p.name))
            if p.default is not None:
                out.append(("operator", "="))
                if p.default < 0:
                    out.append(("operator", "-"))
                out.append(("integer", str(abs(p.default))))
        out.append(("punctuation", ")"))
        out.append(("punctuation", ":"))
        _block_lex(fn.body, out)
    _block_lex(program.body, out)
    return out


def _block_lex(block: tuple, out: list) -> None:
    for s in block:
        if isinstance(s, n.If):
            for j, (test, body) in enumerate(s.branches):
                out.append((KEYWORD, "if" if j == 0 else "elif"))
                _expr_lex(test, out)
                out.append(("punctuation", ":"))
                _block_lex(body, out)
            if s.orelse is not None:
                out.append((KEYWORD, "else"))
                out.append(("punctuation", ":"))
                _block_lex(s.orelse, out)
        elif isinstance(s, n.While):
            out.append((KEYWORD, "while"))
            _expr_lex(s.test, out)
            out.append(("punctuation", ":"))
            _block_lex(s.body, out)
        elif isinstance(s, n.For):
            out.append((KEYWORD, "for"))
            out.append(("identifier", s.var))
            out.append((KEYWORD, "in"))
            out.append((KEYWORD, "range"))
            out.append(("punctuation", "("))
            if s.start is not None:
                _expr_lex(s.start, out)
                out.append(("punctuation", ","))
            _expr_lex(s.stop, out)
            out.append(("punctuation", ")"))
            out.append(("punctuation", ":"))
            _block_lex(s.body, out)
        elif isinstance(s, n.Assign):
            out.append(("identifier", s.target))
            out.append(("operator", "="))
            _expr_lex(s.value, out)
        elif isinstance(s, n.AugAssign):
            out.append(("identifier", s.target))
            out.append(("operator", s.op + "="))
            _expr_lex(s.value, out)
        elif isinstance(s, n.Print):
            out.append((KEYWORD, "print"))
            _args_lex(s.args, out)
        elif isinstance(s, n.Return):
            out.append((KEYWORD, "return"))
            if s.value is not None:
                _expr_lex(s.value, out)
        elif isinstance(s, n.ExprStmt):
            _expr_lex(s.expr, out)
        elif isinstance(s, n.Pass):
            out.append((KEYWORD, "pass"))


def _args_lex(args: tuple, out: list) -> None:
    out.append(("punctuation", "("))
    for i, a in enumerate(args):
        if i:
            out.append(("punctuation", ","))
        _expr_lex(a, out)
    out.append(("punctuation", ")"))


def _expr_lex(e, out: list) -> None:
    if isinstance(e, n.Int):
        out.append(("integer", str(e.value)))
    elif isinstance(e, n.Name):
        out.append(("identifier", e.id))
    elif isinstance(e, n.BinOp):
        _expr_lex(e.left, out)
        out.append((KEYWORD if e.op in KEYWORDS else "operator", e.op))
        _expr_lex(e.right, out)
    elif isinstance(e, n.Paren):
        out.append(("punctuation", "("))
        _expr_lex(e.expr, out)
        out.append(("punctuation", ")"))
    elif isinstance(e, n.Call):
        out.append(("identifier", e.func))
        _args_lex(e.args, out)
    elif isinstance(e, n.UnaryOp):
        out.append((KEYWORD, "not") if e.op == "not" else ("operator", "-"))
        _expr_lex(e.operand, out)
    elif isinstance(e, n.IfExp):
        _expr_lex(e.body, out)
        out.append((KEYWORD, "if"))
        _expr_lex(e.test, out)
        out.append((KEYWORD, "else"))
        _expr_lex(e.orelse, out)
    elif isinstance(e, n.Str):
        out.append(("string", expr_text(e)))
    elif isinstance(e, n.Bool):
        out.append((KEYWORD, "True" if e.value else "False"))
    elif isinstance(e, n.NoneLit):
        out.append((KEYWORD, "None"))
    elif isinstance(e, n.Input):
        out.extend(((KEYWORD, "input"), ("punctuation", "("), ("punctuation", ")")))
    else:
        raise TypeError(f"not an expression: {e!r}")
