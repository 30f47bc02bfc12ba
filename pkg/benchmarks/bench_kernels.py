"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per call for the batched FFT, the gain rule,
the single-frame FFT used by the streaming enhancer and a 10 s enhancement
with each backend.
"""
import argparse
import time

import numpy as np

from specsub import _accel, _kernels
from specsub.gain import GainVariant
from specsub.pipeline import EnhancerConfig, enhance


def best_of(fn, repeat):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def fft_case(n, batch):
    rev, tw = _kernels.fft_tables(n)
    x = np.random.default_rng(0).standard_normal((batch, n)).astype(np.complex128)

    def run(kernel):
        def call():
            rows = x[:, rev].copy()
            kernel(rows, rev, tw)

        return call

    return run


def gain_case(bins):
    rng = np.random.default_rng(1)
    x, p = rng.uniform(0, 2, (2, bins))
    n = rng.uniform(0, 1, bins)
    a = rng.uniform(1, 5, bins)
    code = GainVariant.V443.code

    def run(kernel):
        return lambda: kernel(code, x, p, n, 0.05, a)

    return run


def pipeline_case(seconds):
    x = np.random.default_rng(2).standard_normal(int(8000 * seconds))
    cfg = EnhancerConfig.preset("paper-final")

    def run(use_numba):
        def call():
            saved = _accel.USE_NUMBA
            _accel.USE_NUMBA = use_numba
            try:
                enhance(x, cfg)
            finally:
                _accel.USE_NUMBA = saved

        return call

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can be timed")

    rows = []
    for n, batch in [(256, 1), (256, 1000), (1024, 1000), (4096, 100)]:
        case = fft_case(n, batch)
        rows.append((f"fft N={n} x{batch}", case(_kernels.fft_rows_numpy), case(_kernels.fft_rows_numba)))
    for bins in (129, 4097):
        case = gain_case(bins)
        rows.append((f"gain v443 bins={bins}", case(_kernels.gain_numpy), case(_kernels.gain_numba)))
    case = pipeline_case(10.0)
    rows.append(("enhance 10 s paper-final", case(False), case(True)))

    print(f"{'case':<28}{'numpy':>12}{'numba':>12}{'speedup':>10}")
    for name, slow, fast in rows:
        t_np = best_of(slow, args.repeat)
        if _accel.HAVE_NUMBA:
            t_nb = best_of(fast, args.repeat)
            print(f"{name:<28}{t_np * 1e3:>10.3f}ms{t_nb * 1e3:>10.3f}ms{t_np / t_nb:>9.1f}x")
        else:
            print(f"{name:<28}{t_np * 1e3:>10.3f}ms{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
