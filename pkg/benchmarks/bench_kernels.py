"""Compare the compiled GMP kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--digits 300] [--grid-exp 12] [--orders 60] [--repeat 3]

Times the fixed-point FFT, the ValueBank convolution dot products and a short
series expansion on each available backend, checks the outputs are
bit-identical, and prints one row per kernel.
"""

import argparse
import random
import time

from lindstedt_lab import kernels
from lindstedt_lab.arith import grid_twiddles, make_context, preset_frequency
from lindstedt_lab.lindstedt import expand


def best_of(repeat, fn):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_fft(backend, M, bits, rng_seed, repeat):
    rng = random.Random(rng_seed)
    re = [rng.randrange(-(1 << bits), 1 << bits) for _ in range(M)]
    im = [rng.randrange(-(1 << bits), 1 << bits) for _ in range(M)]
    c, s = grid_twiddles(M, bits)
    return best_of(repeat, lambda: backend.fft(re, im, c, s, bits, 1))


def bench_bank(backend, M, bits, orders, rng_seed, repeat):
    rng = random.Random(rng_seed)
    us = [[rng.randrange(-(1 << bits), 1 << bits) for _ in range(M)] for _ in range(orders)]
    ws = [[rng.randrange(-(1 << bits), 1 << bits) for _ in range(M)] for _ in range(orders)]

    def run():
        bank = backend.ValueBank(M, bits)
        out = []
        for k in range(orders):
            bank.append_u(us[k])
            bank.append_w(ws[k], ws[-1 - k])
            if k:
                out.append(bank.dot(k))
        return out

    return best_of(repeat, run)


def bench_expand(backend, ctx, orders, repeat):
    w = preset_frequency("golden", ctx)
    return best_of(repeat, lambda: expand(w, orders, ctx, backend=backend).u)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--digits", type=int, default=300)
    ap.add_argument("--grid-exp", type=int, default=12)
    ap.add_argument("--orders", type=int, default=60)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    ctx = make_context(args.digits, args.grid_exp)
    M, bits = ctx.grid_size, ctx.frac_bits
    names = kernels.available_backends()
    if "compiled" not in names:
        print("compiled extension not built; timing the python backend only")
    rows = {}
    for name in names:
        b = kernels.get_backend(name)
        rows[name] = {
            f"fft M={M}": bench_fft(b, M, bits, 1, args.repeat),
            f"bank {args.orders} orders": bench_bank(b, M, bits, args.orders, 2, args.repeat),
            f"expand N={args.orders}": bench_expand(b, ctx, args.orders, 1),
        }

    print(f"digits={args.digits} frac_bits={bits} grid={M}")
    print(f"{'kernel':<22}" + "".join(f"{n:>12}" for n in names) + ("   speedup  identical" if len(names) > 1 else ""))
    for kernel in rows[names[0]]:
        line = f"{kernel:<22}" + "".join(f"{rows[n][kernel][0]:>11.4f}s" for n in names)
        if len(names) > 1:
            (tc, oc), (tp, op) = rows["compiled"][kernel], rows["python"][kernel]
            line += f"{tp / tc:>9.1f}x  {oc == op}"
        print(line)


if __name__ == "__main__":
    main()
