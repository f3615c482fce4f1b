"""Compare the numba kernels with their pure-numpy fallbacks.

Kernel rows time the two implementations side by side in one process.
The end-to-end rows (a classifier training step and a batch of implicit
queries with backward) rerun this script in a subprocess with ``RD_NUMBA``
set, because the backend is fixed at import time.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from resample_defend.numerics import kernels


def best_of(fn, repeat):
    fn()  # warm-up (and numba compilation)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(repeat):
    g = np.random.default_rng(0)
    x = g.standard_normal((64, 32, 30, 30)).astype(np.float32)
    cols = kernels._im2col_np(x, 3, 1)
    idx = g.integers(0, 64 * 28 * 28, 4 * 64 * 28 * 28)
    vals = g.standard_normal((len(idx), 64)).astype(np.float32)
    cases = {
        "im2col 64x32x30x30 k3": (lambda: kernels._im2col_np(x, 3, 1), lambda: kernels._im2col_nb(x, 3, 1)),
        "col2im 64x32x30x30 k3": (
            lambda: kernels._col2im_np(cols, x.shape, 3, 1),
            lambda: kernels._col2im_nb(cols, *x.shape, 3, 1),
        ),
        "scatter_add 200k rows x64": (
            lambda: kernels._scatter_add_rows_np(idx, vals, 64 * 28 * 28),
            lambda: kernels._scatter_add_rows_nb(idx, vals, 64 * 28 * 28),
        ),
    }
    rows = []
    for name, (f_np, f_nb) in cases.items():
        rows.append((name, best_of(f_np, repeat), best_of(f_nb, repeat)))
    return rows


def end_to_end(repeat):
    """Timings for the current backend (child-process entry point)."""
    from resample_defend.classifier import ClassifierConfig, init_classifier, predict
    from resample_defend.numerics import Adam, softmax_cross_entropy, sum_all
    from resample_defend.recon import ImplicitConfig, init_implicit, pixel_grid, recon_implicit

    g = np.random.default_rng(0)
    x = g.random((64, 1, 28, 28)).astype(np.float32)
    y = g.integers(0, 10, 64)
    clf = init_classifier(ClassifierConfig(), 0)
    opt = Adam(clf.parameters(), lr=1e-3)

    def train_step():
        loss = softmax_cross_entropy(predict(clf, x), y)
        opt.zero_grad()
        loss.backward()
        opt.step()

    imp = init_implicit(ImplicitConfig(), 0)
    grid = pixel_grid(28, 28) + 0.3

    def implicit_step():
        for p in imp.parameters():
            p.grad = None
        sum_all(recon_implicit(imp, x[:16]).render(grid)).backward()

    return {"classifier train step (bs 64)": best_of(train_step, repeat), "implicit render+backward (16 imgs)": best_of(implicit_step, repeat)}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(end_to_end(args.repeat)))
        return
    if not kernels._HAVE_NUMBA:
        sys.exit("numba is not installed; nothing to compare")
    print(f"{'case':40s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, t_np, t_nb in kernel_rows(args.repeat):
        print(f"{name:40s} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:8.2f}")
    e2e = {}
    for flag in ("0", "1"):
        env = dict(os.environ, RD_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)], env=env, capture_output=True, text=True, check=True)
        e2e[flag] = json.loads(out.stdout)
    for name in e2e["0"]:
        t_np, t_nb = e2e["0"][name], e2e["1"][name]
        print(f"{name:40s} {t_np * 1e3:10.2f} {t_nb * 1e3:10.2f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
