"""Brute-force references that share no code with the fast paths."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def naive_dft(x, sign: int = -1) -> np.ndarray:
    """O(n^2) sum over x_j omega^(jk), evaluated in row blocks to bound memory."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    n = x.size
    j = np.arange(n)
    out = np.empty(n, dtype=np.complex128)
    block = max(1, (1 << 20) // max(n, 1))
    for k0 in range(0, n, block):
        k = np.arange(k0, min(n, k0 + block))
        e = (k[:, None] * j[None, :]) % n  # exact integer phase before scaling
        out[k0:k0 + k.size] = np.exp(sign * 2j * np.pi * e / n) @ x
    return out


def bit_shuffle_matrix(n_qubits: int, gated_bits: Sequence[int]) -> np.ndarray:
    """P with (P x)[v(r)] = x[r]; v(r) lists ungated bits then gated bits, high to low."""
    order = [b for b in reversed(range(n_qubits)) if b not in gated_bits]
    order += [b for b in reversed(range(n_qubits)) if b in gated_bits]
    dim = 2 ** n_qubits
    p = np.zeros((dim, dim))
    for r in range(dim):
        v = 0
        for b in order:
            v = (v << 1) | ((r >> b) & 1)
        p[v, r] = 1
    return p


def kron_gate(n_qubits: int, u: np.ndarray, gated_bits: Sequence[int]) -> np.ndarray:
    """Full 2^n unitary acting as u on gated_bits: P^T (I kron u) P."""
    q = len(gated_bits)
    p = bit_shuffle_matrix(n_qubits, gated_bits)
    return p.T @ np.kron(np.eye(2 ** (n_qubits - q)), u) @ p


def kron_apply(d: np.ndarray, u: np.ndarray, gated_bits: Sequence[int]) -> np.ndarray:
    n = d.shape[0].bit_length() - 1
    full = kron_gate(n, u, gated_bits)
    return full @ d @ full.conj().T


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    d = a @ a.conj().T
    return d / np.trace(d).real


def random_signal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform complex values in the unit square."""
    return rng.random(n) + 1j * rng.random(n)
