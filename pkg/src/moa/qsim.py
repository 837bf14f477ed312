"""Virtual block-diagonalisation of density matrices for gate application.

A 2^n x 2^n density matrix is viewed as a 2n-cube of bits. Coordinate p of
each half addresses bit n-1-p of the row (first half) or column (second
half) index. The gate permutation moves gated coordinates to the end of each
half, so in the permuted view the gate acts on contiguous 2^q x 2^q blocks.
The view is never built: every block is gathered through offsets computed
from the permutation, updated with u . B . u^dagger and scattered back.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import gamma
from .errors import DomainError, MoaIndexError

VALIDATE_TOL = 1e-12


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    data: np.ndarray

    def __post_init__(self):
        dim = 2 ** self.n_qubits
        if self.n_qubits < 1 or np.shape(self.data) != (dim, dim):
            raise DomainError(f"expected a {dim}x{dim} matrix for {self.n_qubits} qubits")

    @classmethod
    def from_array(cls, data) -> "DensityMatrix":
        data = np.array(data, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DomainError(f"density matrix must be square, got {data.shape}")
        n = data.shape[0].bit_length() - 1
        if data.shape[0] != 2 ** n:
            raise DomainError(f"extent {data.shape[0]} is not a power of two")
        return cls(n, data)

    def validate(self, trace: complex | None = None) -> None:
        if not np.allclose(self.data, self.data.conj().T, rtol=0, atol=VALIDATE_TOL):
            raise DomainError("density matrix is not Hermitian")
        if trace is not None and abs(np.trace(self.data) - trace) > VALIDATE_TOL:
            raise DomainError(f"trace {np.trace(self.data)} differs from {trace}")


@dataclass(frozen=True)
class GateSpec:
    q: int
    u: np.ndarray

    def __post_init__(self):
        if np.shape(self.u) != (2 ** self.q, 2 ** self.q):
            raise DomainError(f"gate on {self.q} qubits needs a {2 ** self.q}-square matrix")

    def validate(self) -> None:
        eye = np.eye(2 ** self.q)
        if not np.allclose(self.u @ self.u.conj().T, eye, rtol=0, atol=VALIDATE_TOL):
            raise DomainError("gate matrix is not unitary")


_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
NAMED_GATES = {
    "I": np.eye(2),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
    "H": _H,
    # the first gated bit in coordinate order (the higher bit) is the control
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    "CZ": np.diag([1, 1, 1, -1]),
    "SWAP": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
}


def named_gate(name: str) -> GateSpec:
    try:
        u = np.asarray(NAMED_GATES[name.upper()], dtype=np.complex128)
    except KeyError:
        raise DomainError(f"unknown gate {name!r}; known: {', '.join(NAMED_GATES)}") from None
    return GateSpec(u.shape[0].bit_length() - 1, u)


@dataclass(frozen=True)
class GatePermutation:
    n_qubits: int
    gated_bits: tuple[int, ...]
    t: tuple[int, ...]

    @property
    def q(self) -> int:
        return len(self.gated_bits)


def gate_permutation(n_qubits: int, gated_bits: Sequence[int]) -> GatePermutation:
    """Stable partition of each half: ungated coordinates first, gated last."""
    bits = [int(b) for b in gated_bits]
    if len(set(bits)) != len(bits):
        raise DomainError(f"duplicate gated bit in {bits}")
    if not 1 <= len(bits) <= n_qubits or any(not 0 <= b < n_qubits for b in bits):
        raise DomainError(f"gated bits {bits} invalid for {n_qubits} qubits")
    gated_pos = {n_qubits - 1 - b for b in bits}
    half = [p for p in range(n_qubits) if p not in gated_pos]
    half += [p for p in range(n_qubits) if p in gated_pos]
    t = tuple(half) + tuple(p + n_qubits for p in half)
    return GatePermutation(n_qubits, tuple(sorted(bits)), t)


def permuted_offset(i: Sequence[int], perm: GatePermutation) -> int:
    """Offset in the stored matrix of the element the block view holds at cube index i.

    View coordinate k is stored coordinate t[k], so the stored index j has
    j[t[k]] = i[k].
    """
    size = 2 * perm.n_qubits
    i = tuple(int(v) for v in i)
    if len(i) != size or any(v not in (0, 1) for v in i):
        raise MoaIndexError(f"{i} is not an index of the {size}-cube")
    j = [0] * size
    for k, tk in enumerate(perm.t):
        j[tk] = i[k]
    return gamma(j, (2,) * size)


def view_rows(perm: GatePermutation) -> np.ndarray:
    """Stored row index for every view row (rows and columns permute alike)."""
    n = perm.n_qubits
    v = np.arange(2 ** n)
    rows = np.zeros_like(v)
    for k, tk in enumerate(perm.t[:n]):
        bit = (v >> (n - 1 - k)) & 1
        rows |= bit << (n - 1 - tk)
    return rows


def block_view(d: DensityMatrix, gated_bits: Sequence[int]
               ) -> Iterator[tuple[tuple[int, int], np.ndarray]]:
    """Yield ((a, b), offsets) for every virtual 2^q x 2^q block of the view.

    offsets[x, y] is the ravel offset in d.data of view element
    (a 2^q + x, b 2^q + y).
    """
    perm = gate_permutation(d.n_qubits, gated_bits)
    rows = view_rows(perm)
    size, side = 2 ** d.n_qubits, 2 ** perm.q
    for a in range(size // side):
        r = rows[a * side:(a + 1) * side]
        for b in range(size // side):
            c = rows[b * side:(b + 1) * side]
            yield (a, b), r[:, None] * size + c[None, :]


def apply_gate_inplace(data: np.ndarray, u: np.ndarray, gated_bits: Sequence[int]) -> None:
    n = data.shape[0].bit_length() - 1
    flat = data.reshape(-1)
    if not np.shares_memory(flat, data):
        raise DomainError("density matrix buffer must be contiguous")
    uh = u.conj().T
    for _, offsets in block_view(DensityMatrix(n, data), gated_bits):
        flat[offsets] = u @ flat[offsets] @ uh


def apply_gate(d: DensityMatrix, g: GateSpec, gated_bits: Sequence[int],
               validate: bool = False) -> DensityMatrix:
    """Return U d U^dagger with U = g.u on gated_bits and identity elsewhere."""
    if len(gated_bits) != g.q:
        raise DomainError(f"gate acts on {g.q} qubits, {len(gated_bits)} bits given")
    if validate:
        g.validate()
    out = np.array(d.data, dtype=np.complex128, order="C")
    apply_gate_inplace(out, np.asarray(g.u, dtype=np.complex128), gated_bits)
    return DensityMatrix(d.n_qubits, out)


def gate_flops(n_qubits: int, q: int) -> dict[str, int]:
    """Complex multiplies: blocked update versus two dense 2^n matrix products."""
    side, dim = 2 ** q, 2 ** n_qubits
    return {"blocked": (dim // side) ** 2 * 2 * side ** 3, "dense": 2 * dim ** 3}
