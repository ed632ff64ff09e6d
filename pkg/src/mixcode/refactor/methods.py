"""The refactoring catalogue as AST -> AST transforms.

Every method enumerates its candidate sites up front; ``apply`` picks one
uniformly and performs a deterministic rewrite, so a (site, method) pair
fully determines the output program.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional

from mixcode.lang import nodes as n
from mixcode.refactor.synonyms import DEFAULT_SYNONYMS, SynonymTable


class Method(enum.Enum):
    API_RENAMING = "api-renaming"
    ARGUMENTS_ADDING = "arguments-adding"
    ARGUMENT_RENAMING = "argument-renaming"
    DEAD_FOR_ADDING = "dead-for-adding"
    DEAD_IF_ADDING = "dead-if-adding"
    DEAD_IF_ELSE_ADDING = "dead-if-else-adding"
    DEAD_WHILE_ADDING = "dead-while-adding"
    DUPLICATION = "duplication"
    FIELD_ENHANCEMENT = "field-enhancement"
    FOR_LOOP_ENHANCEMENT = "for-loop-enhancement"
    IF_ENHANCEMENT = "if-enhancement"
    LOCAL_VARIABLE_ADDING = "local-variable-adding"
    LOCAL_VARIABLE_RENAMING = "local-variable-renaming"
    METHOD_NAME_RENAMING = "method-name-renaming"
    PLUS_ZERO = "plus-zero"
    PRINT_ADDING = "print-adding"
    RETURN_OPTIMAL = "return-optimal"

    @property
    def kebab(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "Method":
        """Accept kebab-case (``plus-zero``) or the enum/camel name."""
        key = name.strip()
        if key.lower().replace("_", "-") in ("dead-switch-adding", "deadswitchadding"):
            raise ValueError("dead-switch-adding is not supported: MiniPy has no switch statement")
        for m in cls:
            if key in (m.value, m.name, m.camel):
                return m
        raise ValueError(f"unknown refactoring method {name!r}")

    @property
    def camel(self) -> str:
        return "".join(part.capitalize() for part in self.value.split("-"))


ALL_METHODS = tuple(Method)
SEMANTIC_METHODS = tuple(m for m in Method if m is not Method.API_RENAMING)
_ORDER = {m: i for i, m in enumerate(Method)}


class NotApplicable(ValueError):
    def __init__(self, method: Method):
        super().__init__(f"{method.value} is not applicable to this program")
        self.method = method


class NoApplicableMethod(ValueError):
    pass


@dataclass(frozen=True)
class RefactorOutcome:
    program: n.Program
    method: Method
    site: str


# --- addressing ----------------------------------------------------------------
#
# A block path is ``(root, (stmt_index, slot), ...)`` where root is
# ``("fn", i)`` or ``("top",)`` and slot names a child block (see
# nodes.child_blocks).

def get_block(program: n.Program, path: tuple) -> tuple:
    root = path[0]
    block = program.functions[root[1]].body if root[0] == "fn" else program.body
    for k, slot in path[1:]:
        block = dict(n.child_blocks(block[k]))[slot]
    return block


def _with_child(s, slot, block: tuple):
    if isinstance(s, n.If):
        if slot == "else":
            return n.If(s.branches, block)
        br = list(s.branches)
        br[slot] = (br[slot][0], block)
        return n.If(tuple(br), s.orelse)
    if isinstance(s, n.While):
        return n.While(s.test, block)
    if isinstance(s, n.For):
        return n.For(s.var, s.start, s.stop, block)
    raise TypeError(s)


def _replace_in(block: tuple, steps: tuple, edit) -> tuple:
    if not steps:
        return edit(block)
    (k, slot), rest = steps[0], steps[1:]
    s = block[k]
    child = dict(n.child_blocks(s))[slot]
    return block[:k] + (_with_child(s, slot, _replace_in(child, rest, edit)),) + block[k + 1:]


def edit_block(program: n.Program, path: tuple, edit) -> n.Program:
    """Return a copy of ``program`` with ``edit(block)`` applied at ``path``."""
    root = path[0]
    if root[0] == "fn":
        i = root[1]
        fn = program.functions[i]
        new_fn = n.FunctionDef(fn.name, fn.params, _replace_in(fn.body, path[1:], edit))
        fns = program.functions[:i] + (new_fn,) + program.functions[i + 1:]
        return n.Program(fns, program.body)
    return n.Program(program.functions, _replace_in(program.body, path[1:], edit))


def _walk_blocks(block: tuple, path: tuple):
    yield path, block
    for k, s in enumerate(block):
        for slot, child in n.child_blocks(s):
            yield from _walk_blocks(child, path + ((k, slot),))


def iter_blocks(program: n.Program):
    for i, fn in enumerate(program.functions):
        yield from _walk_blocks(fn.body, (("fn", i),))
    yield from _walk_blocks(program.body, (("top",),))


# --- static facts --------------------------------------------------------------

def _is_numeric(e) -> bool:
    if isinstance(e, n.Paren):
        return _is_numeric(e.expr)
    if isinstance(e, (n.Int, n.Input)):
        return True
    if isinstance(e, n.BinOp):
        return e.op in n.ARITH_OPS or e.op in n.TERM_OPS
    if isinstance(e, n.UnaryOp):
        return e.op == "-"
    if isinstance(e, n.Call):
        return "." in e.func
    return False


def _is_pure(e) -> bool:
    for node in n.iter_expr(e):
        if isinstance(node, n.Input):
            return False
        if isinstance(node, n.Call) and "." not in node.func:
            return False
    return True


def _scope_names(params: Iterable, block: tuple) -> tuple[set, set]:
    """(all identifiers used in a scope, locally assigned names)."""
    used = set(params)
    assigned = set()
    for s in n.iter_stmts(block):
        if isinstance(s, (n.Assign, n.AugAssign)):
            assigned.add(s.target)
        elif isinstance(s, n.For):
            assigned.add(s.var)
        for e in n.stmt_exprs(s):
            used |= n.names_in_expr(e)
    used |= assigned
    return used, assigned


def _calls(program: n.Program) -> set:
    out = set()
    blocks = [fn.body for fn in program.functions] + [program.body]
    for b in blocks:
        for s in n.iter_stmts(b):
            for e in n.stmt_exprs(s):
                for node in n.iter_expr(e):
                    if isinstance(node, n.Call):
                        out.add(node.func)
    return out


def _fresh(prefix: str, taken: set) -> str:
    k = 0
    while f"{prefix}{k}" in taken:
        k += 1
    return f"{prefix}{k}"


_ONE_EQ_ZERO = n.Paren(n.BinOp("==", n.Int(1), n.Int(0)))
_ZERO_EQ_ZERO = n.Paren(n.BinOp("==", n.Int(0), n.Int(0)))
_PRINT0 = n.Print((n.Int(0),))
_PRINT1 = n.Print((n.Int(1),))
NEW_FUNCTION = ("new-function",)
_ARG_POOL = ("c", "extra", "option", "opt", "unused", "spare")
FIELD_MESSAGE = "please check your input."


class Analysis:
    """Candidate sites for every method, computed in one pass over a program."""

    def __init__(self, program: n.Program, synonyms: SynonymTable = DEFAULT_SYNONYMS):
        self.program = program
        self.synonyms = synonyms
        self.sites: dict[Method, list] = {m: [] for m in Method}
        fn_names = {fn.name for fn in program.functions}
        calls = _calls(program)
        everything = set(fn_names) | calls
        scopes = []
        for i, fn in enumerate(program.functions):
            used, assigned = _scope_names((p.name for p in fn.params), fn.body)
            scopes.append((("fn", i), used, assigned - {p.name for p in fn.params}))
            everything |= used
        used, assigned = _scope_names((), program.body)
        scopes.append((("top",), used, assigned))
        everything |= used
        self.everything = everything
        self.dead_name = _fresh("__dead", everything)

        s = self.sites
        for path, block in iter_blocks(program):
            for idx in range(len(block) + 1):
                site = (path, idx)
                s[Method.DEAD_FOR_ADDING].append(site)
                s[Method.DEAD_IF_ADDING].append(site)
                s[Method.DEAD_IF_ELSE_ADDING].append(site)
                s[Method.DEAD_WHILE_ADDING].append(site)
                s[Method.LOCAL_VARIABLE_ADDING].append(site)
            for k, st in enumerate(block):
                if isinstance(st, n.Assign):
                    if _is_pure(st.value) and st.target not in n.names_in_expr(st.value):
                        s[Method.DUPLICATION].append((path, k))
                    if _is_numeric(st.value):
                        s[Method.PLUS_ZERO].append((path, k))
                elif isinstance(st, n.Return):
                    s[Method.PRINT_ADDING].append((path, k + 1))
                    if st.value is not None:
                        s[Method.RETURN_OPTIMAL].append((path, k))
                elif isinstance(st, n.For):
                    if st.start is None:
                        s[Method.FOR_LOOP_ENHANCEMENT].append((path, k))
                elif isinstance(st, n.If):
                    for j, (test, _) in enumerate(st.branches):
                        if test == n.Bool(True):
                            s[Method.IF_ENHANCEMENT].append((path, k, j))

        # print(1) must never run, so besides the slots after a return it may
        # go into a new function that nothing calls
        s[Method.PRINT_ADDING].append(NEW_FUNCTION)

        for i, fn in enumerate(program.functions):
            fn_used = scopes[i][1]
            s[Method.ARGUMENTS_ADDING].append((i,))
            for p in fn.params:
                s[Method.FIELD_ENHANCEMENT].append((i, p.name))
                for new in synonyms.synonyms(p.name):
                    if new not in fn_used and new not in fn_names:
                        s[Method.ARGUMENT_RENAMING].append((i, p.name, new))
            for new in synonyms.synonyms(fn.name):
                if new not in everything:
                    s[Method.METHOD_NAME_RENAMING].append((i, new))

        for root, used, local in scopes:
            for old in sorted(local):
                for new in synonyms.synonyms(old):
                    if new not in used and new not in fn_names:
                        s[Method.LOCAL_VARIABLE_RENAMING].append((root, old, new))

        for old in sorted(c for c in calls if "." in c):
            for new in synonyms.synonyms(old):
                s[Method.API_RENAMING].append((old, new))

    def applicable(self, method: Method) -> bool:
        return bool(self.sites[method])

    def perform(self, method: Method, site) -> RefactorOutcome:
        return RefactorOutcome(_PERFORM[method](self, site), method, _describe(method, site))


# --- rewrites ------------------------------------------------------------------

def _insert(stmt):
    def go(a: Analysis, site):
        path, idx = site
        st = stmt(a) if callable(stmt) else stmt
        return edit_block(a.program, path, lambda b: b[:idx] + (st,) + b[idx:])
    return go


def _print_adding(a: Analysis, site):
    if site == NEW_FUNCTION:
        fn = n.FunctionDef(a.dead_name, (), (_PRINT1,))
        return n.Program(a.program.functions + (fn,), a.program.body)
    return _insert(_PRINT1)(a, site)


def _rewrite_stmt(fn):
    def go(a: Analysis, site):
        path, k = site[0], site[1]
        return edit_block(a.program, path, lambda b: b[:k] + fn(b[k], site) + b[k + 1:])
    return go


def _dup(st, site):
    return (st, st)


def _plus_zero(st, site):
    return (n.Assign(st.target, n.binop("+", st.value, n.Int(0))),)


def _for_enh(st, site):
    return (n.For(st.var, n.Int(0), st.stop, st.body),)


def _if_enh(st, site):
    j = site[2]
    br = list(st.branches)
    br[j] = (_ZERO_EQ_ZERO, br[j][1])
    return (n.If(tuple(br), st.orelse),)


def _ret_opt(st, site):
    return (n.Return(n.ifexp(n.Int(0), _ONE_EQ_ZERO, st.value)),)


def _edit_function(program: n.Program, i: int, fn: n.FunctionDef) -> n.Program:
    return n.Program(program.functions[:i] + (fn,) + program.functions[i + 1:], program.body)


def _args_adding(a: Analysis, site):
    (i,) = site
    fn = a.program.functions[i]
    used, _ = _scope_names((p.name for p in fn.params), fn.body)
    taken = used | {f.name for f in a.program.functions}
    name = next((c for c in _ARG_POOL if c not in taken), None) or _fresh("__arg", taken)
    return _edit_function(a.program, i, n.FunctionDef(fn.name, fn.params + (n.Param(name, 0),), fn.body))


def _field_enh(a: Analysis, site):
    i, pname = site
    fn = a.program.functions[i]
    guard = n.If(((n.BinOp("==", n.Name(pname), n.NoneLit()), (n.Print((n.Str(FIELD_MESSAGE),)),)),))
    return _edit_function(a.program, i, n.FunctionDef(fn.name, fn.params, (guard,) + fn.body))


# renaming helpers

def map_expr(e, f):
    """Rebuild ``e`` bottom-up, replacing each node by ``f(node)``."""
    if isinstance(e, n.BinOp):
        e = n.BinOp(e.op, map_expr(e.left, f), map_expr(e.right, f))
    elif isinstance(e, n.UnaryOp):
        e = n.UnaryOp(e.op, map_expr(e.operand, f))
    elif isinstance(e, n.IfExp):
        e = n.IfExp(map_expr(e.body, f), map_expr(e.test, f), map_expr(e.orelse, f))
    elif isinstance(e, n.Call):
        e = n.Call(e.func, tuple(map_expr(x, f) for x in e.args))
    elif isinstance(e, n.Paren):
        e = n.Paren(map_expr(e.expr, f))
    return f(e)


def map_block(block: tuple, fe, ft=lambda name: name) -> tuple:
    """Apply expression map ``fe`` and target-name map ``ft`` throughout a block."""
    out = []
    for s in block:
        if isinstance(s, n.Assign):
            s = n.Assign(ft(s.target), map_expr(s.value, fe))
        elif isinstance(s, n.AugAssign):
            s = n.AugAssign(ft(s.target), s.op, map_expr(s.value, fe))
        elif isinstance(s, n.Print):
            s = n.Print(tuple(map_expr(x, fe) for x in s.args))
        elif isinstance(s, n.If):
            br = tuple((map_expr(t, fe), map_block(b, fe, ft)) for t, b in s.branches)
            s = n.If(br, None if s.orelse is None else map_block(s.orelse, fe, ft))
        elif isinstance(s, n.While):
            s = n.While(map_expr(s.test, fe), map_block(s.body, fe, ft))
        elif isinstance(s, n.For):
            start = None if s.start is None else map_expr(s.start, fe)
            s = n.For(ft(s.var), start, map_expr(s.stop, fe), map_block(s.body, fe, ft))
        elif isinstance(s, n.Return):
            s = n.Return(None if s.value is None else map_expr(s.value, fe))
        elif isinstance(s, n.ExprStmt):
            s = n.ExprStmt(map_expr(s.expr, fe))
        out.append(s)
    return tuple(out)


def _var_renamer(old: str, new: str):
    def fe(e):
        if isinstance(e, n.Name) and e.id == old:
            return n.Name(new)
        return e

    def ft(name):
        return new if name == old else name
    return fe, ft


def _rename_in_scope(program: n.Program, root: tuple, old: str, new: str) -> n.Program:
    fe, ft = _var_renamer(old, new)
    if root[0] == "fn":
        i = root[1]
        fn = program.functions[i]
        params = tuple(n.Param(ft(p.name), p.default) for p in fn.params)
        return _edit_function(program, i, n.FunctionDef(fn.name, params, map_block(fn.body, fe, ft)))
    return n.Program(program.functions, map_block(program.body, fe, ft))


def _arg_renaming(a: Analysis, site):
    i, old, new = site
    return _rename_in_scope(a.program, ("fn", i), old, new)


def _local_renaming(a: Analysis, site):
    root, old, new = site
    return _rename_in_scope(a.program, root, old, new)


def _rename_calls(program: n.Program, old: str, new: str) -> n.Program:
    def fe(e):
        if isinstance(e, n.Call) and e.func == old:
            return n.Call(new, e.args)
        return e
    fns = tuple(
        n.FunctionDef(new if fn.name == old else fn.name, fn.params, map_block(fn.body, fe))
        for fn in program.functions
    )
    return n.Program(fns, map_block(program.body, fe))


def _method_renaming(a: Analysis, site):
    i, new = site
    return _rename_calls(a.program, a.program.functions[i].name, new)


def _api_renaming(a: Analysis, site):
    old, new = site
    return _rename_calls(a.program, old, new)


_PERFORM = {
    Method.API_RENAMING: _api_renaming,
    Method.ARGUMENTS_ADDING: _args_adding,
    Method.ARGUMENT_RENAMING: _arg_renaming,
    Method.DEAD_FOR_ADDING: _insert(lambda a: n.For(a.dead_name, None, n.Int(0), (_PRINT0,))),
    Method.DEAD_IF_ADDING: _insert(n.If(((_ONE_EQ_ZERO, (_PRINT0,)),))),
    Method.DEAD_IF_ELSE_ADDING: _insert(n.If(((_ONE_EQ_ZERO, (_PRINT0,)),), (n.Pass(),))),
    Method.DEAD_WHILE_ADDING: _insert(n.While(_ONE_EQ_ZERO, (_PRINT0,))),
    Method.DUPLICATION: _rewrite_stmt(_dup),
    Method.FIELD_ENHANCEMENT: _field_enh,
    Method.FOR_LOOP_ENHANCEMENT: _rewrite_stmt(_for_enh),
    Method.IF_ENHANCEMENT: _rewrite_stmt(_if_enh),
    Method.LOCAL_VARIABLE_ADDING: _insert(lambda a: n.Assign(a.dead_name, n.Int(1))),
    Method.LOCAL_VARIABLE_RENAMING: _local_renaming,
    Method.METHOD_NAME_RENAMING: _method_renaming,
    Method.PLUS_ZERO: _rewrite_stmt(_plus_zero),
    Method.PRINT_ADDING: _print_adding,
    Method.RETURN_OPTIMAL: _rewrite_stmt(_ret_opt),
}


def _describe(method: Method, site) -> str:
    def where(path):
        root = path[0]
        head = f"function#{root[1]}" if root[0] == "fn" else "top"
        return head + "".join(f"/{k}.{slot}" for k, slot in path[1:])

    if method in (Method.ARGUMENT_RENAMING,):
        return f"function#{site[0]}: {site[1]} -> {site[2]}"
    if method is Method.LOCAL_VARIABLE_RENAMING:
        return f"{where((site[0],))}: {site[1]} -> {site[2]}"
    if method is Method.METHOD_NAME_RENAMING:
        return f"function#{site[0]} -> {site[1]}"
    if method is Method.API_RENAMING:
        return f"{site[0]} -> {site[1]}"
    if method is Method.ARGUMENTS_ADDING:
        return f"function#{site[0]}"
    if method is Method.FIELD_ENHANCEMENT:
        return f"function#{site[0]}: {site[1]}"
    if site == NEW_FUNCTION:
        return "new uncalled function"
    return f"{where(site[0])}@{site[1]}" + (f" branch {site[2]}" if len(site) > 2 else "")


# --- public API ----------------------------------------------------------------

def applicable(method: Method, program: n.Program, synonyms: SynonymTable = DEFAULT_SYNONYMS) -> bool:
    return Analysis(program, synonyms).applicable(method)


def apply(method: Method, program: n.Program, rng, synonyms: SynonymTable = DEFAULT_SYNONYMS,
          analysis: Optional[Analysis] = None) -> RefactorOutcome:
    """Apply ``method`` at a site drawn uniformly from its candidates."""
    a = analysis if analysis is not None else Analysis(program, synonyms)
    sites = a.sites[method]
    if not sites:
        raise NotApplicable(method)
    return a.perform(method, sites[int(rng.integers(len(sites)))])


def choose(analysis: Analysis, methods, rng) -> tuple[Method, object]:
    """Draw (method, site): method uniform over applicable ``methods``, then site."""
    usable = sorted((m for m in set(methods) if analysis.sites[m]), key=_ORDER.__getitem__)
    if not usable:
        raise NoApplicableMethod("no applicable refactoring method")
    m = usable[int(rng.integers(len(usable)))]
    sites = analysis.sites[m]
    return m, sites[int(rng.integers(len(sites)))]


def random_refactor(program: n.Program, methods, rng, synonyms: SynonymTable = DEFAULT_SYNONYMS,
                    analysis: Optional[Analysis] = None) -> RefactorOutcome:
    a = analysis if analysis is not None else Analysis(program, synonyms)
    m, site = choose(a, methods, rng)
    return a.perform(m, site)


def refactor_or_identity(program: n.Program, methods, rng, analysis: Optional[Analysis] = None) -> n.Program:
    """``random_refactor`` with the identity fallback used when nothing applies."""
    try:
        return random_refactor(program, methods, rng, analysis=analysis).program
    except NoApplicableMethod:
        return program
