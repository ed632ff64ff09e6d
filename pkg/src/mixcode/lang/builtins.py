"""The ``api.*`` builtin table: name -> (arity, implementation).

Names are grouped the same way as the API synonym groups used by
API renaming. Synonyms are not guaranteed to agree semantically
(``api.delete`` subtracts), mirroring the kind of rename that is only
meant to be label preserving.
"""

from __future__ import annotations


def _floor_mod(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError
    return a % b


BUILTINS = {
    "api.add": (2, lambda a, b: a + b),
    "api.plus": (2, lambda a, b: a + b),
    "api.delete": (2, lambda a, b: a - b),
    "api.sub": (2, lambda a, b: a - b),
    "api.minus": (2, lambda a, b: a - b),
    "api.mul": (2, lambda a, b: a * b),
    "api.times": (2, lambda a, b: a * b),
    "api.max": (2, max),
    "api.maximum": (2, max),
    "api.min": (2, min),
    "api.minimum": (2, min),
    "api.abs": (1, abs),
    "api.absolute": (1, abs),
    "api.mod": (2, _floor_mod),
    "api.rem": (2, _floor_mod),
}
