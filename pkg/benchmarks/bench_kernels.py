"""Compiled core vs pure-Python fallback on the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from alphadpp import _pure

try:
    from alphadpp import _core
except ImportError:
    _core = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_det(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n in (8, 10, 12, 14):
        a = np.ascontiguousarray(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        t_py, v_py = best_of(lambda: _pure.det_alpha_dp(a, -0.5), repeat)
        if _core is not None:
            t_c, v_c = best_of(lambda: _core.det_alpha_dp(a, -0.5), repeat)
            rel = abs(v_c - v_py) / abs(v_py)
        else:
            t_c, rel = float("nan"), float("nan")
        rows.append((f"det_alpha_dp n={n}", t_py, t_c, rel))
    return rows


def bench_projection(repeat):
    rng = np.random.default_rng(1)
    rows = []
    for n, s in ((16, 2000), (64, 2000)):
        q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        vecs = np.ascontiguousarray(q)
        sel = (rng.random((s, n)) < 0.4).astype(np.uint8)
        uni = rng.random((s, n))
        t_py, (f_py, _) = best_of(lambda: _pure.projection_dpp_batch(vecs, sel, uni), repeat)
        if _core is not None:
            t_c, (f_c, _) = best_of(lambda: _core.projection_dpp_batch(vecs, sel, uni), repeat)
            agree = float(np.array_equal(f_c, f_py))
        else:
            t_c, agree = float("nan"), float("nan")
        rows.append((f"projection_dpp N={n} S={s}", t_py, t_c, agree))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    print(f"{'kernel':<28}{'python [s]':>12}{'compiled [s]':>14}{'speed-up':>10}  check")
    for name, t_py, t_c, chk in bench_det(args.repeat) + bench_projection(args.repeat):
        print(f"{name:<28}{t_py:>12.4f}{t_c:>14.4f}{t_py / t_c:>10.1f}  {chk:.2g}")
    print("check: relative difference for det_alpha_dp, 1 = identical samples for projection_dpp")


if __name__ == "__main__":
    main()
