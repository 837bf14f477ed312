"""Dense arrays and the MoA operator set.

Every array is a shape plus a row-major ravel. Operators are defined by what
they do to shapes and indices, and the implementations below follow those
index definitions directly; numpy is only used as flat storage.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import DomainError, MoaIndexError, RangeError

_KINDS = (np.int64, np.float64, np.complex128)


def _kind_of(values: np.ndarray) -> type:
    if np.iscomplexobj(values):
        return np.complex128
    if np.issubdtype(values.dtype, np.integer) or values.dtype == np.bool_:
        return np.int64
    return np.float64


def prod(dims: Sequence[int]) -> int:
    # pi(<>) = 1
    return math.prod(int(d) for d in dims)


@dataclass(frozen=True, eq=False)
class MoaArray:
    """Shape vector plus row-major ravel. Immutable; the ravel is read-only."""

    shape: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self):
        shape = tuple(int(d) for d in self.shape)
        if any(d < 0 for d in shape):
            raise DomainError(f"negative extent in shape {shape}")
        data = np.asarray(self.data).reshape(-1)
        data = data.astype(_kind_of(data), copy=True)
        if data.size != prod(shape):
            raise DomainError(f"ravel has {data.size} items, shape {shape} needs {prod(shape)}")
        data.flags.writeable = False
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return len(self.shape)

    @property
    def tau(self) -> int:
        return self.data.size

    def item(self):
        if self.tau != 1:
            raise DomainError(f"array of shape {self.shape} is not a single item")
        return self.data[0].item()

    def to_numpy(self) -> np.ndarray:
        return self.data.reshape(self.shape).copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, MoaArray):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))

    def __repr__(self) -> str:
        return f"MoaArray({format_array(self)})"


def array(values, shape: Sequence[int] | None = None) -> MoaArray:
    """Build an array from nested sequences (shape inferred) or a flat ravel plus shape."""
    if isinstance(values, MoaArray):
        return values
    arr = np.asarray(values)
    if shape is None:
        return MoaArray(arr.shape, arr.reshape(-1))
    return MoaArray(tuple(shape), arr.reshape(-1))


def scalar(value) -> MoaArray:
    return MoaArray((), np.asarray([value]))


def vector(values: Sequence) -> MoaArray:
    values = list(values)
    return MoaArray((len(values),), np.asarray(values, dtype=np.int64 if not values else None))


def iota(n: int) -> MoaArray:
    if n < 0:
        raise DomainError("iota of a negative count")
    return MoaArray((n,), np.arange(n, dtype=np.int64))


def enumerate_indices(shape: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All valid full indices in lexicographic (offset) order."""
    return itertools.product(*(range(int(s)) for s in shape))


def gamma(index: Sequence[int], shape: Sequence[int]) -> int:
    """Row-major offset by Horner's rule: x_j = x_{j-1} * s_j + p_j."""
    index, shape = tuple(index), tuple(shape)
    if len(index) != len(shape):
        raise MoaIndexError(f"index {index} is not a full index for shape {shape}")
    offset = 0
    for axis, (p, s) in enumerate(zip(index, shape)):
        if not 0 <= p < s:
            raise MoaIndexError(f"component {p} out of bounds on axis {axis} (extent {s})")
        offset = offset * s + p
    return offset


def gamma_inverse(offset: int, shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(shape)
    total = prod(shape)
    if not 0 <= offset < total:
        raise RangeError(f"offset {offset} outside [0, {total}) for shape {shape}")
    out = []
    for s in reversed(shape):
        offset, r = divmod(offset, s)
        out.append(r)
    return tuple(reversed(out))


def psi(index: Sequence[int], a: MoaArray) -> MoaArray:
    """Select with a full index (scalar result) or a partial index (sub-array)."""
    index = tuple(int(i) for i in index)
    k = len(index)
    if k > a.dim:
        raise MoaIndexError(f"index of length {k} is too long for a {a.dim}-d array")
    for axis, (p, s) in enumerate(zip(index, a.shape)):
        if not 0 <= p < s:
            raise MoaIndexError(f"component {p} out of bounds on axis {axis} (extent {s})")
    rest = a.shape[k:]
    block = prod(rest)
    start = gamma(index, a.shape[:k]) * block if k else 0
    return MoaArray(rest, a.data[start:start + block])


def reshape(new_shape: Sequence[int], a: MoaArray) -> MoaArray:
    """Cyclic reshape: item k of the result is item k mod tau(a) of the source."""
    new_shape = tuple(int(d) for d in new_shape)
    n = prod(new_shape)
    if n and not a.tau:
        raise DomainError("cannot reshape an empty array to a non-empty shape")
    if not n:
        return MoaArray(new_shape, a.data[:0])
    return MoaArray(new_shape, a.data[np.arange(n) % a.tau])


def ravel(a: MoaArray) -> MoaArray:
    return MoaArray((a.tau,), a.data)


def _axis0_slice(a: MoaArray, start: int, count: int) -> MoaArray:
    block = prod(a.shape[1:])
    return MoaArray((count,) + a.shape[1:], a.data[start * block:(start + count) * block])


def _leading(a: MoaArray) -> int:
    if not a.dim:
        raise DomainError("operation needs at least one axis")
    return a.shape[0]


def take(k: int, a: MoaArray) -> MoaArray:
    """First k major cells for k >= 0, last |k| for k < 0."""
    s0 = _leading(a)
    if abs(k) > s0:
        raise RangeError(f"take {k} from leading extent {s0}")
    return _axis0_slice(a, 0, k) if k >= 0 else _axis0_slice(a, s0 + k, -k)


def drop(k: int, a: MoaArray) -> MoaArray:
    """All but the first k major cells for k >= 0, all but the last |k| for k < 0."""
    s0 = _leading(a)
    if abs(k) > s0:
        raise RangeError(f"drop {k} from leading extent {s0}")
    return _axis0_slice(a, k, s0 - k) if k >= 0 else _axis0_slice(a, 0, s0 + k)


def reverse(a: MoaArray) -> MoaArray:
    s0 = _leading(a)
    block = prod(a.shape[1:])
    order = np.arange(s0)[::-1]
    idx = (order[:, None] * block + np.arange(block)[None, :]).reshape(-1)
    return MoaArray(a.shape, a.data[idx])


def rotate(k: int, a: MoaArray) -> MoaArray:
    """k phi a: (k drop a) ++ (k take a), i.e. a left rotation of the major cells."""
    s0 = _leading(a)
    if s0 == 0:
        return a
    k %= s0
    return cat(drop(k, a), take(k, a))


def _check_perm(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise DomainError(f"{perm} is not a permutation of iota {n}")
    return perm


def transpose(perm: Sequence[int] | None, a: MoaArray) -> MoaArray:
    """i psi (t transpose A) = i[t] psi A.

    Axis k of the source is driven by component t[k] of the result index, so
    (rho result)[t[k]] = (rho a)[k]. For 2-d arrays perm defaults to <1 0>.
    """
    if perm is None:
        if a.dim != 2:
            raise DomainError("transpose without a permutation needs a 2-d array")
        perm = (1, 0)
    perm = _check_perm(perm, a.dim)
    shape = [0] * a.dim
    for k, t in enumerate(perm):
        shape[t] = a.shape[k]
    # numpy's axes argument lists, per result axis, the source axis it reads.
    axes = tuple(perm.index(r) for r in range(a.dim))
    out = a.data.reshape(a.shape).transpose(axes)
    return MoaArray(tuple(shape), out.reshape(-1))


def cat(a: MoaArray, b: MoaArray) -> MoaArray:
    if a.dim == 0 or b.dim == 0 or a.shape[1:] != b.shape[1:]:
        raise DomainError(f"cannot catenate shapes {a.shape} and {b.shape}")
    return MoaArray((a.shape[0] + b.shape[0],) + a.shape[1:], np.concatenate([a.data, b.data]))


def _as_array(x) -> MoaArray:
    return x if isinstance(x, MoaArray) else scalar(x)


def pointwise(op: Callable, a, b) -> MoaArray:
    """Elementwise op with scalar extension."""
    a, b = _as_array(a), _as_array(b)
    if a.shape == b.shape:
        shape = a.shape
    elif a.dim == 0 or b.dim == 0:
        shape = b.shape if a.dim == 0 else a.shape
    else:
        raise DomainError(f"pointwise shapes {a.shape} and {b.shape} differ")
    return MoaArray(shape, np.asarray(op(a.data, b.data)).reshape(-1))


def outer(op: Callable, a: MoaArray, b: MoaArray) -> MoaArray:
    """(i ++ j) psi (a op.outer b) = (i psi a) op (j psi b)."""
    vals = op(a.data[:, None], b.data[None, :])
    return MoaArray(a.shape + b.shape, np.asarray(vals).reshape(-1))


def reduce(op: Callable, a: MoaArray) -> MoaArray:
    """Fold op over the primary axis."""
    s0 = _leading(a)
    rest = a.shape[1:]
    if s0 == 0:
        identity = getattr(op, "identity", None)
        if identity is None:
            raise DomainError("reduction of an empty axis needs an op with an identity")
        return MoaArray(rest, np.full(prod(rest), identity, dtype=a.data.dtype))
    acc = psi((0,), a).data
    for i in range(1, s0):
        acc = np.asarray(op(acc, psi((i,), a).data))
    return MoaArray(rest, acc)


def omega_unary(f: Callable[[MoaArray], MoaArray], sigma: int, a: MoaArray) -> MoaArray:
    """Apply f to every rank-sigma cell of a."""
    if not 0 <= sigma <= a.dim:
        raise DomainError(f"cell rank {sigma} exceeds array rank {a.dim}")
    frame = a.shape[: a.dim - sigma]
    cells = [_as_array(f(psi(i, a))) for i in enumerate_indices(frame)]
    return _assemble(frame, cells)


def omega_binary(g: Callable[[MoaArray, MoaArray], MoaArray], d: tuple[int, int],
                 a: MoaArray, b: MoaArray) -> MoaArray:
    """Pair cells of rank d[0] in a with cells of rank d[1] in b.

    With m the common frame length, the result shape is u ++ v ++ x ++ w: u and
    v are the unshared frame prefixes, x the shared frame suffix and w the
    shape every call to g returns.
    """
    sl, sr = d
    if not (0 <= sl <= a.dim and 0 <= sr <= b.dim):
        raise DomainError(f"cell ranks {d} exceed ranks {(a.dim, b.dim)}")
    fl, fr = a.shape[: a.dim - sl], b.shape[: b.dim - sr]
    m = min(len(fl), len(fr))
    u, xl = fl[: len(fl) - m], fl[len(fl) - m:]
    v, xr = fr[: len(fr) - m], fr[len(fr) - m:]
    if xl != xr:
        raise DomainError(f"frames {fl} and {fr} disagree on the shared part")
    frame = u + v + xl
    cells = []
    for i, j, k in itertools.product(enumerate_indices(u), enumerate_indices(v),
                                     enumerate_indices(xl)):
        cells.append(_as_array(g(psi(i + k, a), psi(j + k, b))))
    return _assemble(frame, cells)


def _assemble(frame: tuple[int, ...], cells: list[MoaArray]) -> MoaArray:
    if not cells:
        return MoaArray(frame, np.zeros(0, dtype=np.int64))
    w = cells[0].shape
    if any(c.shape != w for c in cells):
        raise DomainError("cell results do not share one shape")
    return MoaArray(frame + w, np.concatenate([c.data for c in cells]))


# text literal: shape: <d0 d1 ...> ravel: [e0 e1 ...]

def _fmt_item(x) -> str:
    if isinstance(x, complex):
        return repr(x).replace(" ", "")
    return repr(x)


def format_array(a: MoaArray) -> str:
    dims = " ".join(str(d) for d in a.shape)
    items = " ".join(_fmt_item(x) for x in a.data.tolist())
    return f"shape: <{dims}> ravel: [{items}]"


_LITERAL = re.compile(r"^\s*shape:\s*<([^>]*)>\s*ravel:\s*\[([^\]]*)\]\s*$", re.S)


def parse_array(text: str) -> MoaArray:
    m = _LITERAL.match(text)
    if not m:
        raise DomainError("expected 'shape: <...> ravel: [...]'")
    shape = tuple(int(t) for t in m.group(1).split())
    tokens = m.group(2).split()
    values: list = []
    for tok in tokens:
        for conv in (int, float, complex):
            try:
                values.append(conv(tok))
                break
            except ValueError:
                continue
        else:
            raise DomainError(f"bad array item {tok!r}")
    if any(isinstance(v, complex) for v in values):
        data = np.asarray(values, dtype=np.complex128)
    elif any(isinstance(v, float) for v in values):
        data = np.asarray(values, dtype=np.float64)
    else:
        data = np.asarray(values, dtype=np.int64)
    return MoaArray(shape, data)
