"""Self-check suites run by `moa verify`.

Each check either returns quietly or raises CheckFailed carrying the first
counterexample it met. Suites are kept small enough to finish in seconds.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from . import core, fft, oracles, qsim, reduce
from .errors import NotReducible
from .gen import random_expr, random_shape

SUITES = ("moa", "reduce", "fft", "qsim")
TOL = 1e-9


class CheckFailed(AssertionError):
    pass


def _require(ok: bool, counterexample: str) -> None:
    if not ok:
        raise CheckFailed(counterexample)


@dataclass
class SuiteResult:
    suite: str
    passed: list[str] = field(default_factory=list)
    failed: list[tuple[str, str]] = field(default_factory=list)


_CHECKS: dict[str, list[tuple[str, Callable[[], None]]]] = {s: [] for s in SUITES}


def _check(suite: str, name: str):
    def deco(fn):
        _CHECKS[suite].append((name, fn))
        return fn
    return deco


# moa


@_check("moa", "gamma-roundtrip")
def _gamma_roundtrip():
    for shape in [(3, 5, 4), (2, 2, 2, 2), (7,), (1, 6, 1)]:
        for i in core.enumerate_indices(shape):
            back = core.gamma_inverse(core.gamma(i, shape), shape)
            _require(back == i, f"shape {shape} index {i} -> {back}")


@_check("moa", "psi-composition")
def _psi_composition():
    rng = random.Random(1)
    for _ in range(50):
        shape = random_shape(rng, 4, 256)
        a = core.iota(core.prod(shape))
        a = core.reshape(shape, a)
        p = tuple(rng.randrange(s) for s in shape)
        k = rng.randint(0, len(p))
        lhs = core.psi(p, a)
        rhs = core.psi(p[k:], core.psi(p[:k], a))
        _require(lhs == rhs, f"shape {shape} p={p} split at {k}")


@_check("moa", "transpose-identity")
def _transpose_identity():
    rng = random.Random(2)
    for _ in range(30):
        shape = random_shape(rng, 4, 256)
        a = core.reshape(shape, core.iota(core.prod(shape)))
        perm = list(range(len(shape)))
        rng.shuffle(perm)
        b = core.transpose(perm, a)
        for i in core.enumerate_indices(b.shape):
            j = tuple(i[perm[k]] for k in range(len(perm)))
            _require(core.psi(i, b) == core.psi(j, a), f"perm {perm} shape {shape} index {i}")


@_check("moa", "structural-inverses")
def _structural_inverses():
    rng = random.Random(3)
    for _ in range(50):
        v = core.vector([rng.randint(-9, 9) for _ in range(rng.randint(1, 12))])
        k = rng.randint(-30, 30)
        _require(core.rotate(-k, core.rotate(k, v)) == v, f"rotate {k} on {v.data.tolist()}")
        _require(core.reverse(core.reverse(v)) == v, f"reverse on {v.data.tolist()}")
        k = rng.randint(0, v.tau)
        _require(core.cat(core.take(k, v), core.drop(k, v)) == v,
                 f"take/drop {k} on {v.data.tolist()}")


@_check("moa", "scalar-shapes")
def _scalar_shapes():
    shapes = {core.scalar(5).shape, core.vector([5]).shape, core.array([[5]]).shape}
    _require(shapes == {(), (1,), (1, 1)}, f"got {shapes}")


@_check("moa", "omega-rotate")
def _omega_rotate():
    a = core.array([[1, 2, 3, 4], [5, 6, 7, 8]])
    r = core.omega_binary(lambda k, v: core.rotate(k.item(), v), (0, 1),
                          core.vector([2, 1]), a)
    _require(r.to_numpy().tolist() == [[3, 4, 1, 2], [6, 7, 8, 5]], f"got {r.to_numpy().tolist()}")


# reduce


@_check("reduce", "onf-vs-materialize")
def _onf_vs_materialize():
    rng = random.Random(4)
    for _ in range(200):
        e = random_expr(rng)
        leaf = reduce.leaf_of(e)
        data = core.reshape(leaf.shape, core.iota(core.prod(leaf.shape)))
        want = reduce.materialize(e, data)
        _require(reduce.infer_shape(e) == want.shape, f"shape of {reduce.format_sexpr(e)}")
        try:
            nest = reduce.reduce_to_onf(e)
        except NotReducible:
            continue
        got = nest.evaluate(data.data)
        _require(np.array_equal(got, want.data), f"ONF differs for {reduce.format_sexpr(e)}")


@_check("reduce", "pct-block")
def _pct_block():
    for shape in [(4, 6, 7), (2, 3, 2, 5), (9, 1, 3)]:
        for k in range(len(shape) + 1):
            for j in itertools.product(*map(range, shape[:k])):
                start, length = reduce.pct_lower(j, shape)
                offs = sorted(core.gamma(j + rest, shape)
                              for rest in core.enumerate_indices(shape[k:]))
                _require(offs == list(range(start, start + length)), f"shape {shape} j={j}")


@_check("reduce", "reshape-transpose-onf")
def _rt_onf():
    text = reduce.render_onf(reduce.reduce_to_onf(reduce.reshape_transpose_expr(2, 4)))
    _require("@A + j + 4*i" in text, text)


# fft


def _signal(rng: np.random.Generator, n: int) -> np.ndarray:
    return oracles.random_signal(rng, n)


_FFT_CASES = [("radix2", {}), ("radixn", {"radix": 4}), ("cache", {"c": 4}),
              ("cache", {"c": 16}), ("hypercube", {})]


def _cases(n: int):
    for variant, kw in _FFT_CASES:
        if variant == "radixn" and n & 0x5555_5555 != n:
            continue  # not a power of 4
        if variant == "cache" and kw["c"] > n:
            continue
        yield variant, kw


@_check("fft", "dft-oracle")
def _dft_oracle():
    rng = np.random.default_rng(5)
    for t in range(1, 9):
        n = 2 ** t
        x = _signal(rng, n)
        want = oracles.naive_dft(x)
        for variant, kw in _cases(n):
            err = np.max(np.abs(fft.fft(x, variant, **kw) - want))
            _require(err < TOL * n, f"{variant} {kw} n={n}: max error {err:.3g}")


@_check("fft", "parseval")
def _parseval():
    rng = np.random.default_rng(6)
    for t in range(1, 11):
        n = 2 ** t
        x = _signal(rng, n)
        ex = n * np.sum(np.abs(x) ** 2)
        for variant, kw in _cases(n):
            eX = np.sum(np.abs(fft.fft(x, variant, **kw)) ** 2)
            _require(abs(eX - ex) <= TOL * ex, f"{variant} {kw} n={n}: {eX} vs {ex}")


@_check("fft", "linearity")
def _linearity():
    rng = np.random.default_rng(7)
    for t in range(1, 11):
        n = 2 ** t
        x, y = _signal(rng, n), _signal(rng, n)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        for variant, kw in _cases(n):
            f = lambda z: fft.fft(z, variant, **kw)
            err = np.max(np.abs(f(a * x + b * y) - (a * f(x) + b * f(y))))
            _require(err < TOL, f"{variant} {kw} n={n}: {err:.3g}")


@_check("fft", "inverse-roundtrip")
def _roundtrip():
    rng = np.random.default_rng(8)
    for t in range(1, 11):
        n = 2 ** t
        x = _signal(rng, n)
        for variant, kw in _cases(n):
            back = fft.fft(fft.fft(x, variant, sign=-1, **kw), variant, sign=1, **kw) / n
            err = np.max(np.abs(back - x))
            _require(err < TOL, f"{variant} {kw} n={n}: {err:.3g}")


@_check("fft", "permutation-inverse")
def _perm_inverse():
    for t in range(1, 13):
        n = 2 ** t
        for b in range(1, t + 1):
            c = 2 ** b
            plan = fft.stage_plan(n, c)
            y = np.arange(n)
            for _ in range(plan.l_max):
                y = fft.reshape_transpose(y, c)
            _require(np.array_equal(fft.final_transpose(y, plan.l_max, c), np.arange(n)),
                     f"n={n} c={c}")


@_check("fft", "weights")
def _weights():
    for n in (16, 32, 64):
        for c in (2, 4, 8, 16):
            for stage in fft.stage_plan(n, c).stages:
                closed = fft.stage_weights(stage)
                _require(np.allclose(closed, fft.tracked_weights(stage, c), rtol=0, atol=1e-12),
                         f"n={n} c={c} stage {stage}")


@_check("fft", "stage-accounting")
def _stage_accounting():
    for t in range(1, 13):
        n = 2 ** t
        for b in range(1, t + 1):
            plan = fft.stage_plan(n, 2 ** b)
            _require(len(plan.stages) == t, f"n={n} c={2 ** b}: {len(plan.stages)} stages")
            for s in plan.stages:
                _require(s.v * s.d_v * s.S_v == n, f"n={n} c={2 ** b}: {s}")


@_check("fft", "hypercube-addresses")
def _hypercube_addresses():
    for l in range(1, 7):
        cube = core.reshape((2,) * l, core.iota(2 ** l))
        for j in range(l):
            t = fft.hypercube_tj(l, j)
            _require(sorted(t) == list(range(l)), f"t_{j} for l={l} is {t}")
            got = core.transpose(t, cube).data
            _require(np.array_equal(got, fft.hypercube_addresses(l, j)), f"l={l} j={j}")


# qsim


@_check("qsim", "kron-oracle")
def _kron_oracle():
    rng = np.random.default_rng(9)
    for n in range(1, 5):
        d = oracles.random_density(rng, 2 ** n)
        for q in range(1, min(n, 3) + 1):
            for bits in itertools.combinations(range(n), q):
                u = oracles.random_unitary(rng, 2 ** q)
                got = qsim.apply_gate(qsim.DensityMatrix(n, d), qsim.GateSpec(q, u), bits).data
                err = np.max(np.abs(got - oracles.kron_apply(d, u, bits)))
                _require(err < 1e-12, f"n={n} bits={bits}: {err:.3g}")


@_check("qsim", "trace-hermitian")
def _trace_hermitian():
    rng = np.random.default_rng(10)
    for n in range(1, 6):
        d = qsim.DensityMatrix(n, oracles.random_density(rng, 2 ** n))
        bits = tuple(sorted(rng.choice(n, size=min(n, 2), replace=False).tolist()))
        g = qsim.GateSpec(len(bits), oracles.random_unitary(rng, 2 ** len(bits)))
        out = qsim.apply_gate(d, g, bits).data
        _require(abs(np.trace(out) - np.trace(d.data)) < 1e-12, f"trace n={n} bits={bits}")
        _require(np.max(np.abs(out - out.conj().T)) < 1e-12, f"hermiticity n={n} bits={bits}")


@_check("qsim", "gate-permutation")
def _gate_permutation():
    want = {(0, 2): (0, 2, 1, 3, 4, 6, 5, 7), (1, 2): (0, 3, 1, 2, 4, 7, 5, 6)}
    for bits, t in want.items():
        got = qsim.gate_permutation(4, bits).t
        _require(got == t, f"bits {bits}: {got}")
    for n in range(1, 6):
        for q in range(1, n + 1):
            for bits in itertools.combinations(range(n), q):
                t = qsim.gate_permutation(n, bits).t
                ok = sorted(t) == list(range(2 * n)) and t[n:] == tuple(p + n for p in t[:n])
                _require(ok, f"n={n} bits={bits}: {t}")


def run_suite(suite: str) -> SuiteResult:
    res = SuiteResult(suite)
    for name, fn in _CHECKS[suite]:
        try:
            fn()
        except CheckFailed as exc:
            res.failed.append((name, str(exc)))
        else:
            res.passed.append(name)
    return res


def run(scope: str, out: TextIO) -> bool:
    """Run the suites in scope, report to out, return True iff every check passed."""
    suites = SUITES if scope == "all" else (scope,)
    ok = True
    for s in suites:
        res = run_suite(s)
        print(f"{s}: {len(res.passed)} passed, {len(res.failed)} failed", file=out)
        for name, ce in res.failed:
            print(f"  FAIL {s}/{name}: {ce}", file=out)
        ok &= not res.failed
    return ok
