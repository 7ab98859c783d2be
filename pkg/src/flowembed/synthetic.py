"""Generate a desk-scale corpus where the label is a data-flow property.

Positive samples contain a null-constant source whose value flows along a
directed path into a later use (the classic dereference-before-assignment
shape); negatives look the same on the surface but the null source never
reaches a use, either because the pointer is initialized from real data
or because it is reassigned before use.
"""

from __future__ import annotations

import numpy as np

from .cparser import SourceFunction
from .data import Corpus
from .pipeline import derive_seed

_NAMES = ["buf", "ptr", "str", "data", "msg", "tmp", "out", "src", "dst", "line"]
_INT_NAMES = ["n", "len", "count", "size", "total", "idx", "k", "step"]


def _filler(rng, ints):
    kind = rng.integers(0, 3)
    a = str(rng.choice(ints))
    b = str(rng.choice(ints))
    c = int(rng.integers(1, 100))
    if kind == 0:
        return f"int {a}_{c} = {a} + {c};"
    if kind == 1:
        return f"{a} = {b} + {c};"
    return f"if ({a} > {c}) {a} = {a} - {b};"


def _make_function(rng, index, vulnerable):
    ptr = f"{rng.choice(_NAMES)}{int(rng.integers(0, 100))}"
    ints = list(rng.choice(_INT_NAMES, size=2, replace=False))
    lines = [f"int fn_{index}(int {ints[0]}, int {ints[1]})", "{"]
    for _ in range(int(rng.integers(1, 4))):
        lines.append("    " + _filler(rng, ints))
    if vulnerable:
        # null source reaches the use
        lines.append(f"    char *{ptr} = NULL;")
        for _ in range(int(rng.integers(0, 3))):
            lines.append("    " + _filler(rng, ints))
        lines.append(f"    process({ptr});")
    else:
        shape = rng.integers(0, 3)
        if shape == 0:
            # initialized from a string constant
            lines.append(f'    char *{ptr} = "seed";')
            lines.append(f"    process({ptr});")
        elif shape == 1:
            # null killed by a reassignment before the use
            lines.append(f"    char *{ptr} = NULL;")
            lines.append(f"    {ptr} = name_of({ints[0]});")
            lines.append(f"    process({ptr});")
        else:
            # null never used
            lines.append(f"    char *{ptr} = NULL;")
            lines.append(f"    process({ints[0]});")
    for _ in range(int(rng.integers(0, 2))):
        lines.append("    " + _filler(rng, ints))
    lines.append(f"    return {rng.choice(ints)};")
    lines.append("}")
    return "\n".join(lines)


def synthetic_corpus(n: int = 400, seed: int = 0, name: str = "synthetic-null-flow") -> Corpus:
    """n//2 positive and n - n//2 negative functions, deterministic in seed."""
    rng = np.random.default_rng(derive_seed(seed, "synthetic"))
    half = n // 2
    labels = [1] * half + [0] * (n - half)
    samples = []
    for i, label in enumerate(labels):
        code = _make_function(rng, i, vulnerable=bool(label))
        samples.append(SourceFunction(id=f"syn{i}", code=code, label=label))
    order = rng.permutation(len(samples))
    return Corpus([samples[i] for i in order], name=name)
