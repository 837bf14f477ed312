"""Symbolic structural expressions, psi-reduction and loop-nest lowering.

The DNF is the composition of per-operator index rewrites from a result index
down to a leaf index. The ONF is built differently: each result axis is kept as
a list of mixed-radix digits, and every digit knows how much it adds to the
leaf offset for each of its values. Structural operators only regroup, slice,
reverse or roll digits, so no element is ever touched. Lowering then factors
every digit into affine pieces; a digit that cannot be factored has no
start/stop/stride form and the expression is reported as not reducible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence, Union

import numpy as np

from . import core
from .core import MoaArray, gamma, gamma_inverse, prod
from .errors import DomainError, MoaIndexError, NotReducible, RangeError

# expression nodes


@dataclass(frozen=True)
class Leaf:
    shape: tuple[int, ...]
    name: str = "A"


@dataclass(frozen=True)
class Reshape:
    new_shape: tuple[int, ...]
    child: "Expr"


@dataclass(frozen=True)
class Transpose:
    perm: tuple[int, ...] | None
    child: "Expr"


@dataclass(frozen=True)
class Take:
    k: int
    child: "Expr"


@dataclass(frozen=True)
class Drop:
    k: int
    child: "Expr"


@dataclass(frozen=True)
class Reverse:
    child: "Expr"


@dataclass(frozen=True)
class Rotate:
    k: int
    child: "Expr"


@dataclass(frozen=True)
class PsiSelect:
    index: tuple[int, ...]
    child: "Expr"


Expr = Union[Leaf, Reshape, Transpose, Take, Drop, Reverse, Rotate, PsiSelect]


def leaf_of(e: Expr) -> Leaf:
    while not isinstance(e, Leaf):
        e = e.child
    return e


def _perm_of(e: Transpose, rank: int) -> tuple[int, ...]:
    if e.perm is None:
        if rank != 2:
            raise DomainError("transpose without a permutation needs a 2-d child")
        return (1, 0)
    perm = tuple(e.perm)
    if sorted(perm) != list(range(rank)):
        raise DomainError(f"{perm} is not a permutation of iota {rank}")
    return perm


def infer_shape(e: Expr) -> tuple[int, ...]:
    if isinstance(e, Leaf):
        return tuple(e.shape)
    s = infer_shape(e.child)
    if isinstance(e, Reshape):
        if prod(e.new_shape) and not prod(s):
            raise DomainError("reshape of an empty array to a non-empty shape")
        return tuple(e.new_shape)
    if isinstance(e, Transpose):
        perm = _perm_of(e, len(s))
        out = [0] * len(s)
        for k, t in enumerate(perm):
            out[t] = s[k]
        return tuple(out)
    if isinstance(e, PsiSelect):
        if len(e.index) > len(s):
            raise MoaIndexError(f"index {e.index} too long for shape {s}")
        for axis, (p, n) in enumerate(zip(e.index, s)):
            if not 0 <= p < n:
                raise MoaIndexError(f"component {p} out of bounds on axis {axis} (extent {n})")
        return s[len(e.index):]
    if not s:
        raise DomainError(f"{type(e).__name__} needs at least one axis")
    if isinstance(e, (Take, Drop)):
        if abs(e.k) > s[0]:
            raise RangeError(f"{type(e).__name__.lower()} {e.k} from leading extent {s[0]}")
        if isinstance(e, Take):
            return (abs(e.k),) + s[1:]
        return (s[0] - abs(e.k),) + s[1:]
    if isinstance(e, (Reverse, Rotate)):
        return s
    raise DomainError(f"unknown node {e!r}")


def materialize(e: Expr, leaf: MoaArray) -> MoaArray:
    """Naive evaluation with the core operators; the oracle for every reduction."""
    if isinstance(e, Leaf):
        if leaf.shape != tuple(e.shape):
            raise DomainError(f"leaf {e.name} has shape {e.shape}, got {leaf.shape}")
        return leaf
    a = materialize(e.child, leaf)
    if isinstance(e, Reshape):
        return core.reshape(e.new_shape, a)
    if isinstance(e, Transpose):
        return core.transpose(_perm_of(e, a.dim), a)
    if isinstance(e, Take):
        return core.take(e.k, a)
    if isinstance(e, Drop):
        return core.drop(e.k, a)
    if isinstance(e, Reverse):
        return core.reverse(a)
    if isinstance(e, Rotate):
        return core.rotate(e.k, a)
    if isinstance(e, PsiSelect):
        return core.psi(e.index, a)
    raise DomainError(f"unknown node {e!r}")


# DNF: composed index rewrites

IndexMap = Callable[[tuple[int, ...]], tuple[int, ...]]


@dataclass(frozen=True)
class DnfForm:
    leaf: Leaf
    shape: tuple[int, ...]
    steps: tuple[tuple[str, IndexMap], ...]  # outermost operator first

    def index_map(self, index: Sequence[int]) -> tuple[int, ...]:
        i = tuple(int(v) for v in index)
        for _, step in self.steps:
            i = step(i)
        return i

    def offset(self, index: Sequence[int]) -> int:
        return gamma(self.index_map(index), self.leaf.shape)

    def describe(self) -> list[str]:
        return [label for label, _ in self.steps]


def _rewrite(e: Expr) -> tuple[str, IndexMap]:
    s = infer_shape(e.child)
    if isinstance(e, Reshape):
        new, tau = tuple(e.new_shape), prod(s)
        return (f"reshape {new}",
                lambda i: gamma_inverse(gamma(i, new) % tau, s))
    if isinstance(e, Transpose):
        perm = _perm_of(e, len(s))
        return (f"transpose {perm}", lambda i: tuple(i[t] for t in perm))
    if isinstance(e, Take):
        start = 0 if e.k >= 0 else s[0] + e.k
        return (f"take {e.k}", lambda i: (i[0] + start,) + i[1:])
    if isinstance(e, Drop):
        start = e.k if e.k >= 0 else 0
        return (f"drop {e.k}", lambda i: (i[0] + start,) + i[1:])
    if isinstance(e, Reverse):
        return ("reverse", lambda i: (s[0] - 1 - i[0],) + i[1:])
    if isinstance(e, Rotate):
        k = e.k
        return (f"rotate {k}", lambda i: ((i[0] + k) % s[0],) + i[1:])
    if isinstance(e, PsiSelect):
        prefix = tuple(e.index)
        return (f"psi {prefix}", lambda i: prefix + i)
    raise NotReducible(f"no index rewrite for {type(e).__name__}")


def reduce_to_dnf(e: Expr) -> DnfForm:
    shape = infer_shape(e)
    steps = []
    node = e
    while not isinstance(node, Leaf):
        steps.append(_rewrite(node))
        node = node.child
    return DnfForm(node, shape, tuple(steps))


def pct_lower(j: Sequence[int], xi_shape: Sequence[int]) -> tuple[int, int]:
    """Offsets selected by partial index j form [start, start + length)."""
    j, xi_shape = tuple(j), tuple(xi_shape)
    k = len(j)
    if k > len(xi_shape):
        raise MoaIndexError(f"index {j} too long for shape {xi_shape}")
    length = prod(xi_shape[k:])
    start = gamma(j, xi_shape[:k]) * length if k else 0
    return start, length


# address digits


class _Digit:
    """One mixed-radix digit: extent values, each adding a fixed amount to the offset.

    Contributions are normalised so value 0 adds nothing. An affine digit adds
    coeff * value and stores no table.
    """

    __slots__ = ("extent", "coeff", "_table")

    def __init__(self, extent: int, coeff: int | None = None, table: np.ndarray | None = None):
        self.extent = int(extent)
        self.coeff = None if coeff is None else int(coeff)
        self._table = table
        if coeff is None:
            c = int(table[1]) if extent > 1 else 0
            if np.array_equal(table, c * np.arange(extent, dtype=np.int64)):
                self.coeff, self._table = c, None

    @classmethod
    def from_table(cls, table: np.ndarray) -> tuple["_Digit", int]:
        table = np.asarray(table, dtype=np.int64)
        shift = int(table[0])
        return cls(table.size, table=table - shift), shift

    @property
    def affine(self) -> bool:
        return self.coeff is not None

    def table(self) -> np.ndarray:
        if self.affine:
            return self.coeff * np.arange(self.extent, dtype=np.int64)
        return self._table

    def value(self, v: int) -> int:
        return self.coeff * v if self.affine else int(self._table[v])

    def split(self, outer: int) -> tuple["_Digit", "_Digit"]:
        inner = self.extent // outer
        if self.affine:
            return _Digit(outer, self.coeff * inner), _Digit(inner, self.coeff)
        t = self._table.reshape(outer, inner)
        o, i = t[:, 0], t[0, :]
        if not np.array_equal(t, o[:, None] + i[None, :]):
            raise NotReducible(f"digit of extent {self.extent} does not factor at {outer}")
        return _Digit(outer, table=o), _Digit(inner, table=i)

    def sliced(self, start: int, count: int) -> tuple["_Digit", int]:
        if self.affine:
            return _Digit(count, self.coeff), self.coeff * start
        return _Digit.from_table(self._table[start:start + count])

    def reversed(self) -> tuple["_Digit", int]:
        if self.affine:
            return _Digit(self.extent, -self.coeff), self.coeff * (self.extent - 1)
        return _Digit.from_table(self._table[::-1])

    def rolled(self, k: int) -> tuple["_Digit", int]:
        return _Digit.from_table(np.roll(self.table(), -k))

    def key(self) -> tuple:
        if self.affine:
            return (self.extent, self.coeff)
        return (self.extent, self._table.tobytes())


def _merge(outer: _Digit, inner: _Digit) -> _Digit:
    if outer.affine and inner.affine and outer.coeff == inner.coeff * inner.extent:
        return _Digit(outer.extent * inner.extent, inner.coeff)
    t = outer.table()[:, None] + inner.table()[None, :]
    return _Digit(t.size, table=t.reshape(-1))


def _extent(digits: list[_Digit]) -> int:
    return prod(d.extent for d in digits)


def _keep(digits: list[_Digit]) -> list[_Digit]:
    return [d for d in digits if d.extent > 1]


class _View:
    """Per-axis digit lists plus a base offset into the leaf ravel."""

    def __init__(self, axes: list[list[_Digit]], base: int = 0):
        self.axes = axes
        self.base = base

    @classmethod
    def leaf(cls, shape: tuple[int, ...]) -> "_View":
        axes, stride = [], 1
        for s in reversed(shape):
            axes.append(_keep([_Digit(s, stride)]))
            stride *= s
        return cls(axes[::-1])

    def digits(self) -> list[_Digit]:
        return [d for axis in self.axes for d in axis]


def _prefix(digits: list[_Digit], count: int) -> list[_Digit]:
    digits = list(digits)
    while len(digits) > 1 and _extent(digits[1:]) >= count:
        digits.pop(0)  # fixed at value 0
    while digits:
        inner = _extent(digits[1:])
        if count % inner == 0:
            top, _ = digits[0].sliced(0, count // inner)
            return _keep([top] + digits[1:])
        digits[0:2] = [_merge(digits[0], digits[1])]
    return []


def _group(digits: list[_Digit], shape: tuple[int, ...]) -> list[list[_Digit]]:
    digits = list(digits)
    axes = []
    for extent in shape:
        axis = []
        while extent > 1:
            d = digits[0]
            if extent % d.extent == 0:
                axis.append(digits.pop(0))
                extent //= d.extent
            elif d.extent % extent == 0:
                outer, inner = d.split(extent)
                axis.append(outer)
                digits[0] = inner
                extent = 1
            else:
                digits[0:2] = [_merge(d, digits[1])]
        axes.append(axis)
    return axes


def _slice(digits: list[_Digit], start: int, count: int) -> tuple[list[_Digit], int]:
    if count == _extent(digits):
        return digits, 0
    top, rest = digits[0], digits[1:]
    inner = _extent(rest)
    if start % inner == 0 and count % inner == 0:
        d, shift = top.sliced(start // inner, count // inner)
        return _keep([d] + rest), shift
    a = start // inner
    if (start + count - 1) // inner == a:
        sub, shift = _slice(rest, start - a * inner, count)
        return sub, shift + top.value(a)
    return _slice([_merge(top, rest[0])] + rest[1:], start, count)


def _roll(digits: list[_Digit], k: int) -> tuple[list[_Digit], int]:
    k %= _extent(digits)
    if k == 0:
        return digits, 0
    inner = _extent(digits[1:])
    if k % inner == 0:
        d, shift = digits[0].rolled(k // inner)
        return _keep([d] + digits[1:]), shift
    return _roll([_merge(digits[0], digits[1])] + digits[2:], k)


def _select(digits: list[_Digit], v: int) -> int:
    total = 0
    for d in reversed(digits):
        v, r = divmod(v, d.extent)
        total += d.value(r)
    return total


def _view_of(e: Expr) -> _View:
    if isinstance(e, Leaf):
        return _View.leaf(tuple(e.shape))
    view = _view_of(e.child)
    s = infer_shape(e.child)
    if isinstance(e, Reshape):
        digits = view.digits()
        old, new = prod(s), prod(e.new_shape)
        if new < old:
            digits = _prefix(digits, new)
        elif new > old:
            if new % old == 0:
                digits = _keep([_Digit(new // old, 0)]) + digits
            else:
                full = _Digit(1, 0)
                for d in digits:
                    full = _merge(full, d)
                d, shift = _Digit.from_table(full.table()[np.arange(new) % old])
                digits, view.base = [d], view.base + shift
        return _View(_group(digits, tuple(e.new_shape)), view.base)
    if isinstance(e, Transpose):
        perm = _perm_of(e, len(s))
        axes = [None] * len(s)
        for k, t in enumerate(perm):
            axes[t] = view.axes[k]
        return _View(axes, view.base)
    if isinstance(e, PsiSelect):
        base = view.base
        for axis, v in zip(view.axes, e.index):
            base += _select(axis, v)
        return _View(view.axes[len(e.index):], base)
    axis0, rest = view.axes[0], view.axes[1:]
    if isinstance(e, (Take, Drop)):
        n = abs(e.k)
        if isinstance(e, Take):
            start, count = (0, n) if e.k >= 0 else (s[0] - n, n)
        else:
            start, count = (n, s[0] - n) if e.k >= 0 else (0, s[0] - n)
        digits, shift = _slice(axis0, start, count)
        return _View([digits] + rest, view.base + shift)
    if isinstance(e, Reverse):
        digits, shift = [], 0
        for d in axis0:
            r, sh = d.reversed()
            digits.append(r)
            shift += sh
        return _View([digits] + rest, view.base + shift)
    if isinstance(e, Rotate):
        digits, shift = _roll(axis0, e.k) if axis0 else (axis0, 0)
        return _View([digits] + rest, view.base + shift)
    raise NotReducible(f"no digit rule for {type(e).__name__}")


def _divisors(n: int) -> list[int]:
    return [k for k in range(2, n) if n % k == 0]


@lru_cache(maxsize=4096)
def _factor_key(key: tuple) -> tuple[tuple[int, int], ...] | None:
    extent, payload = key
    if isinstance(payload, int):
        return ((extent, payload),)
    digit = _Digit(extent, table=np.frombuffer(payload, dtype=np.int64).copy())
    best = None
    for outer in _divisors(extent):
        try:
            o, i = digit.split(outer)
        except NotReducible:
            continue
        fo, fi = _factor_key(o.key()), _factor_key(i.key())
        if fo is None or fi is None:
            continue
        cand = _merge_affine(list(fo) + list(fi))
        if best is None or len(cand) < len(best):
            best = tuple(cand)
    return best


def _merge_affine(pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for e, c in pairs:
        if out and out[-1][1] == c * e:
            pe, _ = out.pop()
            out.append((pe * e, c))
        else:
            out.append((e, c))
    return out


# ONF


@dataclass(frozen=True)
class Loop:
    var: str
    start: int
    stop: int  # exclusive
    stride: int = 1
    stop_label: str | None = None


@dataclass(frozen=True)
class Term:
    var: str
    coeff: int
    label: str | None = None  # symbolic coefficient used when rendering


@dataclass(frozen=True)
class LoopNest:
    loops: tuple[Loop, ...]
    base: int
    terms: tuple[Term, ...]
    leaf: Leaf

    def addresses(self) -> np.ndarray:
        """Leaf offsets in loop-nest order (outermost loop slowest)."""
        coeff = {t.var: t.coeff for t in self.terms}
        acc = np.full((), self.base, dtype=np.int64)
        for loop in self.loops:
            vals = np.arange(loop.start, loop.stop, loop.stride, dtype=np.int64)
            acc = acc[..., None] + coeff.get(loop.var, 0) * vals
        return acc.reshape(-1)

    def evaluate(self, leaf_ravel: np.ndarray) -> np.ndarray:
        return np.asarray(leaf_ravel)[self.addresses()]


_NAMES = "ijklmnopqrstuvwxyzabcdefgh"


def _loop_names(count: int) -> list[str]:
    # innermost loop is i, the next one out j, and so on
    names = [_NAMES[k] if k < len(_NAMES) else f"v{k}" for k in range(count)]
    return names[::-1]


def reduce_to_onf(e: Expr) -> LoopNest:
    """Lower e to loops over its result ravel order with one affine address."""
    shape = infer_shape(e)
    leaf = leaf_of(e)
    if prod(shape) == 0:
        return LoopNest((Loop("i", 0, 0),), 0, (Term("i", 1),), leaf)
    try:
        view = _view_of(e)
        base, pairs = view.base, []
        for d in view.digits():
            factors = _factor_key(d.key())
            if factors is None:
                raise NotReducible(f"digit of extent {d.extent} has no affine factorisation")
            pairs.extend(factors)
    except NotReducible:
        # An intermediate view can be irregular even when the final stream is
        # not (a cyclic reshape later trimmed by take). Factor the DNF stream.
        base, pairs = _stream_factors(e, shape)
    pairs = _merge_affine(pairs)
    names = _loop_names(len(pairs))
    loops = tuple(Loop(v, 0, ext) for v, (ext, _) in zip(names, pairs))
    terms = tuple(Term(v, c) for v, (_, c) in zip(names, pairs))
    return LoopNest(loops, base, terms, leaf)


STREAM_LIMIT = 1 << 16


def _stream_factors(e: Expr, shape: tuple[int, ...]) -> tuple[int, list[tuple[int, int]]]:
    total = prod(shape)
    if total > STREAM_LIMIT:
        raise NotReducible(f"no digit-level reduction and {total} items is too many to factor")
    dnf = reduce_to_dnf(e)
    stream = np.fromiter((dnf.offset(i) for i in core.enumerate_indices(shape)),
                         dtype=np.int64, count=total)
    digit, base = _Digit.from_table(stream)
    factors = _factor_key(digit.key()) if digit.extent > 1 else ()
    if factors is None:
        raise NotReducible("address stream has no affine loop form")
    return base, list(factors)


def _fmt_term(t: Term, first: bool) -> str:
    if t.label is not None:
        return f"{'' if first else ' + '}{t.var}*{t.label}"
    c = t.coeff
    mag = abs(c)
    body = t.var if mag == 1 else f"{mag}*{t.var}"
    if first:
        return body if c > 0 else f"-{body}"
    return f" + {body}" if c > 0 else f" - {body}"


def render_onf(nest: LoopNest) -> str:
    """Text dump: `for v in start..stop step stride {` per loop, address in the body."""
    addr = f"@{nest.leaf.name}"
    if nest.base:
        addr += f" + {nest.base}" if nest.base > 0 else f" - {-nest.base}"
    for t in nest.terms:
        if t.coeff or t.label:
            addr += _fmt_term(t, first=False)
    lines = []
    for depth, loop in enumerate(nest.loops):
        stop = loop.stop_label or str(loop.stop)
        lines.append("  " * depth + f"for {loop.var} in {loop.start}..{stop} step {loop.stride} {{")
    lines.append("  " * len(nest.loops) + addr)
    for depth in reversed(range(len(nest.loops))):
        lines.append("  " * depth + "}")
    return "\n".join(lines)


# named expressions


def reshape_transpose_expr(r: int, c: int, name: str = "A") -> Expr:
    """<r c> reshape (transpose (<r c> reshape leaf))."""
    return Reshape((r, c), Transpose((1, 0), Reshape((r, c), Leaf((r * c,), name))))


def final_transpose_expr(d: int, sigma: int, name: str = "x") -> Expr:
    """Ravel of ((-sigma) rotate iota d) transposed over the 2-cube of a 2^d vector."""
    perm = tuple(int(v) for v in core.rotate(-sigma, core.iota(d)).data)
    cube = Reshape((2,) * d, Leaf((2 ** d,), name))
    return Reshape((2 ** d,), Transpose(perm, cube))


def final_transpose_onf(d: int, sigma: int, name: str = "x") -> LoopNest:
    """ONF of the final transpose with loop t outside loop s, labelled symbolically."""
    if not 0 <= sigma <= d:
        raise DomainError(f"sigma={sigma} outside [0, {d}]")
    nest = reduce_to_onf(final_transpose_expr(d, sigma, name))
    # the reduction yields up to two loops: extent 2^(d-sigma) stride 1, then 2^sigma
    coeff = {t.var: t.coeff for t in nest.terms}
    expected = [(2 ** (d - sigma), 1), (2 ** sigma, 2 ** (d - sigma))]
    got = [(lp.stop, coeff[lp.var]) for lp in nest.loops]
    if got != [p for p in expected if p[0] > 1]:
        raise NotReducible(f"unexpected final-transpose nest {got}")
    loops = (Loop("t", 0, 2 ** (d - sigma), 1, "2^(d-sigma)"),
             Loop("s", 0, 2 ** sigma, 1, "2^sigma"))
    terms = (Term("s", 2 ** (d - sigma), "2^(d-sigma)"), Term("t", 1))
    return LoopNest(loops, 0, terms, nest.leaf)


# s-expressions

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text)


def _parse(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise DomainError("unexpected end of expression")
    tok = tokens[pos]
    if tok == "(":
        items, pos = [], pos + 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _parse(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise DomainError("unbalanced parentheses")
        return items, pos + 1
    if tok == ")":
        raise DomainError("unexpected ')'")
    return tok, pos + 1


def _ints(item) -> tuple[int, ...]:
    if not isinstance(item, list):
        raise DomainError(f"expected a parenthesised integer list, got {item!r}")
    return tuple(int(x) for x in item)


def _build(node) -> Expr:
    if not isinstance(node, list) or not node:
        raise DomainError(f"expected a node, got {node!r}")
    head, args = node[0], node[1:]
    try:
        if head == "leaf":
            return Leaf(_ints(args[1]), args[0])
        if head == "reshape":
            return Reshape(_ints(args[0]), _build(args[1]))
        if head == "transpose":
            if len(args) == 1:
                return Transpose(None, _build(args[0]))
            return Transpose(_ints(args[0]), _build(args[1]))
        if head in ("take", "drop", "rotate"):
            cls = {"take": Take, "drop": Drop, "rotate": Rotate}[head]
            return cls(int(args[0]), _build(args[1]))
        if head == "reverse":
            return Reverse(_build(args[0]))
        if head == "psi":
            return PsiSelect(_ints(args[0]), _build(args[1]))
    except (IndexError, ValueError, TypeError) as exc:
        raise DomainError(f"malformed ({head} ...): {exc}") from None
    raise DomainError(f"unknown operator {head!r}")


def parse_sexpr(text: str) -> Expr:
    tokens = _tokens(text)
    tree, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise DomainError("trailing tokens after expression")
    e = _build(tree)
    infer_shape(e)
    return e


def format_sexpr(e: Expr) -> str:
    def ints(v):
        return "(" + " ".join(str(x) for x in v) + ")"

    if isinstance(e, Leaf):
        return f"(leaf {e.name} {ints(e.shape)})"
    inner = format_sexpr(e.child)
    if isinstance(e, Reshape):
        return f"(reshape {ints(e.new_shape)} {inner})"
    if isinstance(e, Transpose):
        return f"(transpose {inner})" if e.perm is None else f"(transpose {ints(e.perm)} {inner})"
    if isinstance(e, (Take, Drop, Rotate)):
        return f"({type(e).__name__.lower()} {e.k} {inner})"
    if isinstance(e, Reverse):
        return f"(reverse {inner})"
    return f"(psi {ints(e.index)} {inner})"
