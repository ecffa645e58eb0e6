"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from esym import _fallback
from esym.kernels import available_backends


def cases(rng):
    z = rng.standard_normal((2000, 400)) + 0.2
    ns = np.arange(20, 401, 20, dtype=np.int64)
    m = np.abs(rng.standard_normal(24)) + 1e-3
    thr = float(m.sum() * 0.3)
    return {
        "signed_rank_prefix_sums[2000x400]": lambda k: k.signed_rank_prefix_sums(z, ns),
        "signflip_tail_count[n=24]": lambda k: k.signflip_tail_count(m, thr),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is available")
    backends.setdefault("python", _fallback)
    rng = np.random.default_rng(0)
    print(f"{'kernel':38s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, fn in cases(rng).items():
        ref = None
        times = {}
        for b, mod in backends.items():
            out = fn(mod)
            if ref is None:
                ref = out
            else:
                assert np.array_equal(np.asarray(out), np.asarray(ref)), f"{name}: backends disagree"
            times[b] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{name:38s} " + " ".join(f"{t * 1e3:8.2f}ms" for t in times.values()) + f"   {speed:6.1f}x")


if __name__ == "__main__":
    main()
