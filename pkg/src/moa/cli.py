"""Command-line front end: verify, reduce, bench, qsim and fft subcommands.

Exit codes: 0 success, 1 verification failure, 2 expression not reducible,
64 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core, fft, qsim, reduce, verify
from .errors import MoaError, NotReducible

EXIT_OK, EXIT_VERIFY, EXIT_NOT_REDUCIBLE, EXIT_USAGE = 0, 1, 2, 64
CSV_HEADER = "variant,n,c,radix,trial,seconds,checksum"
MAX_EXPONENT = 30


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _pow2(text: str) -> int:
    v = int(text)
    if v < 2 or v & (v - 1):
        raise argparse.ArgumentTypeError(f"{text} is not a power of two >= 2")
    return v


def _exponent(text: str) -> int:
    t = int(text)
    if not 1 <= t <= MAX_EXPONENT:
        raise argparse.ArgumentTypeError(f"size exponent {text} outside 1..{MAX_EXPONENT}")
    return t


def _sign(text: str) -> int:
    if text not in ("+1", "1", "-1"):
        raise argparse.ArgumentTypeError(f"sign must be +1 or -1, got {text}")
    return int(text)


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be at least 1")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed {text} is not an unsigned 64-bit integer")
    return v


@dataclass
class BenchConfig:
    sizes: list[int]
    c_values: list[int] = field(default_factory=lambda: [16])
    radix: int = 4
    variants: list[str] = field(default_factory=lambda: list(fft.VARIANTS))
    trials: int = 1
    seed: int = 0
    sign: int = -1

    def __post_init__(self):
        if not self.sizes or any(not 1 <= t <= MAX_EXPONENT for t in self.sizes):
            raise UsageError(f"size exponents must lie in 1..{MAX_EXPONENT}: {self.sizes}")
        for v in [*self.c_values, self.radix]:
            if v < 2 or v & (v - 1):
                raise UsageError(f"{v} is not a power of two >= 2")
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if self.sign not in (1, -1):
            raise UsageError("sign must be +1 or -1")
        unknown = set(self.variants) - set(fft.VARIANTS)
        if unknown:
            raise UsageError(f"unknown variants {sorted(unknown)}")


@dataclass(frozen=True)
class TimingRecord:
    variant: str
    n: int
    c: int
    radix: int
    trial: int
    seconds: float
    checksum: float

    def csv(self) -> str:
        return (f"{self.variant},{self.n},{self.c},{self.radix},{self.trial},"
                f"{self.seconds:.9f},{self.checksum!r}")


def bench_input(seed: int, t: int) -> np.ndarray:
    """Uniform complex in the unit square from PCG64 seeded by (seed, t)."""
    rng = np.random.default_rng([seed, t])
    n = 2 ** t
    return rng.random(n) + 1j * rng.random(n)


def _is_power_of(n: int, r: int) -> bool:
    while n % r == 0 and n > 1:
        n //= r
    return n == 1


def bench_cells(cfg: BenchConfig, note=None):
    """Yield (variant, t, c, radix) cells; skipped combinations go to note()."""
    for t in cfg.sizes:
        n = 2 ** t
        for variant in cfg.variants:
            if variant == "cache":
                cs = sorted({min(c, n) for c in cfg.c_values})
                for c in cs:
                    yield variant, t, c, 2
            elif variant == "radixn":
                if _is_power_of(n, cfg.radix):
                    yield variant, t, n, cfg.radix
                elif note:
                    note(f"radixn skipped for n={n}: not a power of radix {cfg.radix}")
            else:
                yield variant, t, n, 2


def run_bench(cfg: BenchConfig, note=None):
    for variant, t, c, radix in bench_cells(cfg, note):
        x = bench_input(cfg.seed, t)
        for trial in range(cfg.trials):
            start = time.perf_counter()
            X = fft.fft(x, variant, sign=cfg.sign, radix=radix, c=c)
            seconds = max(time.perf_counter() - start, 1e-9)
            yield TimingRecord(variant, 2 ** t, c, radix, trial, seconds,
                               float(np.sum(np.abs(X))))


def load_matrix(path: Path) -> np.ndarray:
    if path.suffix == ".npy":
        return np.load(path)
    return core.parse_array(path.read_text()).to_numpy()


def save_matrix(path: Path, data: np.ndarray) -> None:
    if path.suffix == ".npy":
        np.save(path, data)
    else:
        path.write_text(core.format_array(core.array(data)) + "\n")


def _cmd_verify(args) -> int:
    return EXIT_OK if verify.run(args.scope, sys.stdout) else EXIT_VERIFY


def _cmd_reduce(args) -> int:
    e = reduce.parse_sexpr(args.expr)
    if args.dnf:
        dnf = reduce.reduce_to_dnf(e)
        print("dnf: " + " . ".join([*dnf.describe(), dnf.leaf.name]))
    try:
        nest = reduce.reduce_to_onf(e)
    except NotReducible as exc:
        print(f"not reducible: {exc}", file=sys.stderr)
        return EXIT_NOT_REDUCIBLE
    print(reduce.render_onf(nest))
    return EXIT_OK


def _cmd_bench(args) -> int:
    cfg = BenchConfig(sizes=args.size, c_values=args.csize or [16], radix=args.radix,
                      variants=args.variant or list(fft.VARIANTS), trials=args.trials,
                      seed=args.seed, sign=args.sign)
    print(f"# seed={cfg.seed}", file=sys.stderr)
    print(CSV_HEADER)
    for rec in run_bench(cfg, note=lambda m: print(f"# {m}", file=sys.stderr)):
        print(rec.csv(), flush=True)
    return EXIT_OK


def _cmd_qsim(args) -> int:
    path = Path(args.matrix)
    d = qsim.DensityMatrix.from_array(load_matrix(path))
    g = qsim.named_gate(args.gate)
    perm = qsim.gate_permutation(d.n_qubits, args.bits)
    print("<" + " ".join(map(str, perm.t)) + ">")
    out = qsim.apply_gate(d, g, args.bits)
    save_matrix(Path(args.output) if args.output else path, out.data)
    return EXIT_OK


def _cmd_fft(args) -> int:
    if args.input:
        x = load_matrix(Path(args.input)).reshape(-1)
    else:
        x = bench_input(args.seed, args.size[0])
    X = fft.fft(x, args.variant[0] if args.variant else "radix2", sign=args.sign,
                radix=args.radix, c=min(args.csize[0] if args.csize else 16, x.size))
    print(core.format_array(core.array(X)))
    print(f"# checksum={float(np.sum(np.abs(X)))!r}", file=sys.stderr)
    return EXIT_OK


def _bits(text: str) -> list[int]:
    try:
        return [int(b) for b in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bit list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="moa", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run invariant suites")
    v.add_argument("--scope", choices=[*verify.SUITES, "all"], default="all")
    v.set_defaults(run=_cmd_verify)

    r = sub.add_parser("reduce", help="print the loop nest of an s-expression")
    r.add_argument("expr")
    r.add_argument("--dnf", action="store_true", help="also print the index map")
    r.set_defaults(run=_cmd_reduce)

    def fft_flags(sp, sizes_required):
        sp.add_argument("--size", "-n", type=_exponent, nargs="+", required=sizes_required,
                        help="exponents t with n = 2^t")
        sp.add_argument("--csize", type=_pow2, nargs="+", help="blocking sizes c")
        sp.add_argument("--radix", type=_pow2, default=4)
        sp.add_argument("--variant", choices=list(fft.VARIANTS), nargs="+")
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--sign", type=_sign, default=-1)

    b = sub.add_parser("bench", help="time FFT variants, CSV on stdout")
    fft_flags(b, True)
    b.add_argument("--trials", type=_positive, default=1)
    b.set_defaults(run=_cmd_bench)

    f = sub.add_parser("fft", help="transform one seeded or file input")
    fft_flags(f, False)
    f.add_argument("--input", help="vector file (.npy or array text)")
    f.set_defaults(run=_cmd_fft)

    q = sub.add_parser("qsim", help="apply a named gate to a density matrix file")
    q.add_argument("matrix")
    q.add_argument("--gate", required=True)
    q.add_argument("--bits", type=_bits, required=True, help="gated bits, e.g. 0,2")
    q.add_argument("--output", help="defaults to overwriting MATRIX")
    q.set_defaults(run=_cmd_qsim)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "fft" and not args.size and not args.input:
        parser.error("fft needs --size or --input")
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"moa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NotReducible as exc:
        print(f"not reducible: {exc}", file=sys.stderr)
        return EXIT_NOT_REDUCIBLE
    except (MoaError, OSError) as exc:
        print(f"moa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
