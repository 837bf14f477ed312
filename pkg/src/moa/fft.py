"""FFT family: radix-2, general radix, cache-blocked and hypercube paths.

All transforms compute X_k = sum_j x_j * exp(sign * 2 pi i j k / n) with
sign = -1 by default. Every path starts from the bit-reversed (or
digit-reversed) input and applies in-place decimation-in-time butterflies.
Loops over butterflies are numpy-vectorised; each vectorised statement is one
of the loop nests written out in the docstrings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import core
from .errors import DomainError


def _log2(n: int, what: str = "n") -> int:
    if n < 1 or n & (n - 1):
        raise DomainError(f"{what}={n} is not a power of two")
    return n.bit_length() - 1


def _as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if x.size < 2:
        raise DomainError("signal length must be at least 2")
    _log2(x.size)
    return x


def _twiddles(L: int, exponents: np.ndarray, sign: int) -> np.ndarray:
    # omega_L^e with omega_L = exp(sign 2 pi i / L)
    return np.exp(sign * 2j * np.pi * (exponents % L) / L)


def _check_sign(sign: int) -> int:
    if sign not in (1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign}")
    return sign


# permutations


def digit_reverse_indices(n: int, radix: int = 2) -> np.ndarray:
    """Index k of the result reads position digitreverse(k) of the input."""
    m = round(math.log(n, radix))
    if radix ** m != n:
        raise DomainError(f"n={n} is not a power of radix {radix}")
    k = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(m):
        k, r = np.divmod(k, radix)
        rev = rev * radix + r
    return rev


def bit_reverse_permute(x) -> np.ndarray:
    x = _as_signal(x)
    return x[digit_reverse_indices(x.size, 2)]


def reshape_transpose(x, c: int) -> np.ndarray:
    """ravel(<r c> reshape (transpose (<r c> reshape x))) with r = n / c.

    for j in 0..c:            # outer
        for i in 0..r:        # inner
            temp[index++] = x[j + c*i]
    """
    x = np.asarray(x)
    n = x.size
    if c < 1 or n % c:
        raise DomainError(f"c={c} does not divide n={n}")
    r = n // c
    return np.ascontiguousarray(x.reshape(r, c).T).reshape(-1)


def final_transpose(x, l_max: int, c: int) -> np.ndarray:
    """Undo l_max reshape-transposes in one pass.

    With d = log2 n and sigma = l_max * log2 c:
    for t in 0..2^(d-sigma):
        for s in 0..2^sigma:
            out[index++] = x[s * 2^(d-sigma) + t]
    """
    x = np.asarray(x)
    d = _log2(x.size)
    sigma = l_max * _log2(c, "c")
    if sigma > d:
        raise DomainError(f"sigma={sigma} exceeds d={d}")
    tmax, smax = 2 ** (d - sigma), 2 ** sigma
    return np.ascontiguousarray(x.reshape(smax, tmax).T).reshape(-1)


# radix 2


def _radix2_stage(y: np.ndarray, L: int, sign: int) -> None:
    """One in-place stage of cycle length L.

    for col in 0..n step L:
        for row in 0..L/2:
            c = w[row] * y[col + row + L/2]
            d = y[col + row]
            y[col + row] = d + c
            y[col + row + L/2] = d - c
    """
    h = L // 2
    v = y.reshape(-1, 2, h)
    c = _twiddles(L, np.arange(h), sign) * v[:, 1, :]
    d = v[:, 0, :].copy()
    v[:, 0, :] = d + c
    v[:, 1, :] = d - c


def fft_radix2(x, sign: int = -1) -> np.ndarray:
    _check_sign(sign)
    y = bit_reverse_permute(x)
    L = 2
    while L <= y.size:
        _radix2_stage(y, L, sign)
        L *= 2
    return y


# general radix


def fft_general_radix(x, radix: int, sign: int = -1) -> np.ndarray:
    """Radix-r decimation in time; n must be a power of r.

    For each group of r sub-transforms of length L:
        c(0) = z(i + j)
        c(k) = ww(j*k) * z(i + j + k*L)             k = 1..r-1
        z(i + j + k*L) = sum_l c(l) * ebase(k*l mod r)
    with ww the length-rL roots and ebase the r-th roots of unity.
    """
    _check_sign(sign)
    x = _as_signal(x)
    _log2(radix, "radix")
    if radix < 2:
        raise DomainError("radix must be at least 2")
    n = x.size
    y = x[digit_reverse_indices(n, radix)]
    ebase = _twiddles(radix, np.outer(np.arange(radix), np.arange(radix)), sign)
    L = 1
    while L < n:
        v = y.reshape(-1, radix, L)
        ww = _twiddles(radix * L, np.outer(np.arange(radix), np.arange(L)), sign)
        c = v * ww[None, :, :]
        v[...] = np.einsum("kl,blj->bkj", ebase, c)
        L *= radix
    return y


# cache-blocked plan


@dataclass(frozen=True)
class StageDescriptor:
    l: int
    p: int
    L: int
    v: int
    d_v: int
    S_v: int
    S_B: int | None  # defined only for l < l_max


@dataclass(frozen=True)
class CacheFftPlan:
    n: int
    c: int
    t: int
    logc: int
    l_max: int
    p_max: int
    stages: tuple[StageDescriptor, ...]


def stage_plan(n: int, c: int) -> CacheFftPlan:
    """Factor n = 2^p_max * c^l_max with 1 <= p_max <= log2 c."""
    t, b = _log2(n), _log2(c, "c")
    if not 2 <= c <= n:
        raise DomainError(f"need 2 <= c <= n, got c={c}, n={n}")
    l_max = -(-t // b) - 1
    p_max = t - l_max * b
    stages = []
    for l in range(l_max + 1):
        for p in range(1, (p_max if l == l_max else b) + 1):
            v, d_v = 2 ** p, c ** l
            S_B = 2 ** p_max * c ** (l_max - l - 1) if l < l_max else None
            stages.append(StageDescriptor(l, p, v * d_v, v, d_v, n // (v * d_v), S_B))
    return CacheFftPlan(n, c, t, b, l_max, p_max, tuple(stages))


@dataclass(frozen=True)
class WeightSpec:
    L: int
    l: int
    sigma: int
    d: int
    c: int


def weight(spec: WeightSpec, j: int, sign: int = -1) -> complex:
    """Diagonal entry j of the block weight matrix: omega_L^(sigma + j c^l)."""
    if not 0 <= j < spec.d // 2 or not 0 <= spec.sigma < spec.c ** spec.l:
        raise DomainError(f"j={j} or sigma={spec.sigma} out of range for {spec}")
    e = spec.sigma + j * spec.c ** spec.l
    return complex(_twiddles(spec.L, np.asarray(e), sign))


def stage_weights(stage: StageDescriptor, sign: int = -1) -> np.ndarray:
    """Closed-form weights as a (d_v, 1, v/2) block: w[sigma, 0, j] = omega_L^(sigma + j d_v)."""
    sigma = np.arange(stage.d_v)[:, None]
    j = np.arange(stage.v // 2)[None, :]
    return _twiddles(stage.L, sigma + j * stage.d_v, sign)[:, None, :]


def weight_vector(stage: StageDescriptor, n: int, sign: int = -1) -> np.ndarray:
    """Length-n weights in logical order: in each run of L, L/2 ones then omega_L^0..L/2-1."""
    q = np.arange(n) % stage.L
    h = stage.L // 2
    out = np.ones(n, dtype=np.complex128)
    low = q >= h
    out[low] = _twiddles(stage.L, q[low] - h, sign)
    return out


def tracked_weights(stage: StageDescriptor, c: int, sign: int = -1) -> np.ndarray:
    """The same (d_v, 1, v/2) block found by following logical indices through the transposes."""
    n = stage.v * stage.d_v * stage.S_v
    idx = np.arange(n)
    for _ in range(stage.l):
        idx = reshape_transpose(idx, c)
    q = idx.reshape(stage.d_v, stage.S_v, 2, stage.v // 2)[:, :, 0, :] % stage.L
    if not np.all(q == q[:, :1, :]):
        raise AssertionError("weights differ between copies of one block type")
    return _twiddles(stage.L, q[:, :1, :], sign)


def _cache_stage(y: np.ndarray, stage: StageDescriptor, w: np.ndarray) -> None:
    """Butterflies of one stage on the physical buffer after l reshape-transposes.

    for sigma in 0..d_v:                  # block type
        for s in 0..S_v:                  # copies of that block
            for j in 0..v/2:
                a = y[base + j]; b = y[base + j + v/2]
                d = w[sigma, j] * b
                y[base + j] = a + d; y[base + j + v/2] = a - d
    with base = (sigma * S_v + s) * v.
    """
    h = stage.v // 2
    blk = y.reshape(stage.d_v, stage.S_v, 2, h)
    d = w * blk[:, :, 1, :]
    a = blk[:, :, 0, :].copy()
    blk[:, :, 0, :] = a + d
    blk[:, :, 1, :] = a - d


def fft_cache_optimized(x, c: int, sign: int = -1, check_weights: bool = False,
                        trace: list | None = None) -> np.ndarray:
    """Radix-2 FFT whose butterfly strides never exceed c/2.

    After every log2 c stages the data is reshape-transposed so the next stages
    again work on contiguous blocks of at most c items; one final transpose
    restores natural order. With trace given, events are appended as
    ("stage", l, p, stride), ("reshape_transpose", l) and ("final_transpose",).
    """
    _check_sign(sign)
    y = bit_reverse_permute(x)
    plan = stage_plan(y.size, c)
    l = 0
    for stage in plan.stages:
        if stage.l != l:
            y = reshape_transpose(y, c)
            l = stage.l
            if trace is not None:
                trace.append(("reshape_transpose", l))
        w = stage_weights(stage, sign)
        if check_weights:
            assert np.allclose(w, tracked_weights(stage, c, sign), rtol=0, atol=1e-12)
        _cache_stage(y, stage, w)
        if trace is not None:
            trace.append(("stage", stage.l, stage.p, stage.v // 2))
    y = final_transpose(y, plan.l_max, c)
    if trace is not None:
        trace.append(("final_transpose",))
    return y


# hypercube


def hypercube_tj(l: int, j: int) -> tuple[int, ...]:
    """t_j = (((l-1)-j) take c) ++ ((-1) take c) ++ (j take (((l-1)-j) drop c)), c = iota l."""
    if not 0 <= j < l:
        raise DomainError(f"stage j={j} outside [0, {l})")
    c = core.iota(l)
    t = core.cat(core.cat(core.take(l - 1 - j, c), core.take(-1, c)),
                 core.take(j, core.drop(l - 1 - j, c)))
    return tuple(int(v) for v in t.data)


@dataclass(frozen=True)
class HypercubeStage:
    l: int
    j: int

    @property
    def f(self) -> int:
        return 2 ** self.j

    @property
    def g(self) -> int:
        return 2 ** (self.j + 1)

    @property
    def t_j(self) -> tuple[int, ...]:
        return hypercube_tj(self.l, self.j)


def hypercube_addresses(l: int, j: int) -> np.ndarray:
    """Address stream of the three-loop form, loops m (outer), n, k (inner).

    (rav Z)[m*g + k*f + n]
    """
    f, g = 2 ** j, 2 ** (j + 1)
    m = np.arange(2 ** (l - 1 - j))[:, None, None]
    n = np.arange(f)[None, :, None]
    k = np.arange(2)[None, None, :]
    return (m * g + k * f + n).reshape(-1)


def hypercube_stage_apply(z: np.ndarray, l: int, j: int, weights=None) -> np.ndarray:
    """In place: for m < 2^(l-1-j), n < 2^j: a = z[mg+n], d = w[n] z[mg+f+n] -> <a+d, a-d>."""
    if z.size != 2 ** l:
        raise DomainError(f"buffer of {z.size} items is not a {l}-cube")
    if not 0 <= j < l:
        raise DomainError(f"stage j={j} outside [0, {l})")
    f = 2 ** j
    v = z.reshape(2 ** (l - 1 - j), 2, f)
    d = v[:, 1, :] if weights is None else np.asarray(weights) * v[:, 1, :]
    a = v[:, 0, :].copy()
    v[:, 0, :] = a + d
    v[:, 1, :] = a - d
    return z


def fft_hypercube(x, sign: int = -1) -> np.ndarray:
    _check_sign(sign)
    z = bit_reverse_permute(x)
    l = _log2(z.size)
    for j in range(l):
        f = 2 ** j
        hypercube_stage_apply(z, l, j, _twiddles(2 * f, np.arange(f), sign))
    return z


VARIANTS: dict[str, Callable] = {
    "radix2": lambda x, sign=-1, **_: fft_radix2(x, sign),
    "radixn": lambda x, sign=-1, radix=4, **_: fft_general_radix(x, radix, sign),
    "cache": lambda x, sign=-1, c=16, **_: fft_cache_optimized(x, c, sign),
    "hypercube": lambda x, sign=-1, **_: fft_hypercube(x, sign),
}


def fft(x, variant: str = "radix2", sign: int = -1, radix: int = 4, c: int = 16) -> np.ndarray:
    try:
        fn = VARIANTS[variant]
    except KeyError:
        raise DomainError(f"unknown variant {variant!r}") from None
    return fn(x, sign=sign, radix=radix, c=c)
