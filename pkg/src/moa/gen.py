"""Random structural expressions for oracle checks."""

from __future__ import annotations

import random

from .core import prod
from .reduce import (Drop, Expr, Leaf, PsiSelect, Reshape, Reverse, Rotate, Take,
                     Transpose, infer_shape)


def random_shape(rng: random.Random, max_dim: int = 4, max_tau: int = 256,
                 max_extent: int = 6) -> tuple[int, ...]:
    while True:
        s = tuple(rng.randint(1, max_extent) for _ in range(rng.randint(1, max_dim)))
        if prod(s) <= max_tau:
            return s


def _factor_shape(rng: random.Random, total: int, max_dim: int) -> tuple[int, ...]:
    dims, rest = [], total
    for p in (2, 2, 2, 3, 3, 5, 7):
        while rest % p == 0 and rng.random() < 0.6:
            dims.append(p)
            rest //= p
    dims.append(rest)
    rng.shuffle(dims)
    dims = [d for d in dims if d > 1][:max_dim] or [1]
    if prod(dims) != total:
        dims = dims[:-1] + [total // prod(dims[:-1])]
    return tuple(dims)


def random_expr(rng: random.Random, max_depth: int = 5, max_dim: int = 4,
                max_tau: int = 256) -> Expr:
    """A non-empty expression over one leaf; every intermediate has tau <= max_tau."""
    e: Expr = Leaf(random_shape(rng, max_dim, max_tau), "A")
    depth = rng.randint(1, max_depth)
    while depth:
        s = infer_shape(e)
        op = rng.choice(["reshape", "transpose", "take", "drop", "reverse", "rotate", "psi"]
                        if s else ["reshape"])
        if op == "reshape":
            if rng.random() < 0.6:
                new = _factor_shape(rng, prod(s), max_dim)
            else:
                new = random_shape(rng, max_dim, max_tau)
            cand = Reshape(new, e)
        elif op == "transpose":
            perm = list(range(len(s)))
            rng.shuffle(perm)
            cand = Transpose(tuple(perm), e)
        elif op in ("take", "drop"):
            k = rng.randint(-s[0], s[0])
            cand = (Take if op == "take" else Drop)(k, e)
        elif op == "reverse":
            cand = Reverse(e)
        elif op == "rotate":
            cand = Rotate(rng.randint(-2 * s[0], 2 * s[0]), e)
        else:
            if len(s) < 2:
                continue
            k = rng.randint(1, len(s) - 1)
            cand = PsiSelect(tuple(rng.randrange(x) for x in s[:k]), e)
        shape = infer_shape(cand)
        if 0 in shape or len(shape) > max_dim:
            continue
        e = cand
        depth -= 1
    return e
