from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SynonymTable:
    groups: tuple

    def __post_init__(self):
        seen = set()
        for g in self.groups:
            if len(g) < 2:
                raise ValueError(f"synonym group needs >= 2 members: {g}")
            for name in g:
                if name in seen:
                    raise ValueError(f"{name!r} appears in more than one group")
                seen.add(name)
        object.__setattr__(self, "_index", {name: g for g in self.groups for name in g})

    def synonyms(self, name: str) -> tuple:
        """Other members of ``name``'s group, in table order."""
        g = self._index.get(name)
        if g is None:
            return ()
        return tuple(x for x in g if x != name)

    def __contains__(self, name: str) -> bool:
        return name in self._index


DEFAULT_SYNONYMS = SynonymTable((
    # variables and parameters
    ("number", "size", "amount"),
    ("count", "tally", "counter"),
    ("total", "accumulator", "running"),
    ("result", "res", "output"),
    ("value", "val", "item"),
    ("index", "idx", "position"),
    ("limit", "bound", "upper"),
    ("first", "left", "lhs"),
    ("second", "right", "rhs"),
    ("product", "prod", "mult"),
    ("temp", "tmp", "swap"),
    ("flag", "marker", "signal"),
    ("step", "stride", "delta"),
    ("base", "root", "origin"),
    ("exponent", "degree", "times"),
    ("remainder", "rest", "modulo"),
    ("current", "cur", "now"),
    ("n", "num", "k"),
    ("i", "j", "ii"),
    ("x", "y", "z"),
    # function names
    ("compute", "calculate", "evaluate"),
    ("solve", "resolve", "answer"),
    ("check", "verify", "inspect"),
    ("run", "execute", "perform"),
    ("process", "handle", "work"),
    ("helper", "aux", "util"),
    # builtin APIs
    ("api.add", "api.plus", "api.delete"),
    ("api.sub", "api.minus"),
    ("api.mul", "api.times"),
    ("api.max", "api.maximum"),
    ("api.min", "api.minimum"),
    ("api.abs", "api.absolute"),
    ("api.mod", "api.rem"),
))
