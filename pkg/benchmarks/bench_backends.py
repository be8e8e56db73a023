"""Compare the compiled and pure-numpy backends on the hot kernels.

Runs itself twice as a subprocess (once per backend, selected via the
WRANKSIM_NO_NUMBA environment flag, which is read at import time) and
prints a per-operation timing table with speedup ratios.

Usage: python3 benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def _time(fn, repeats: int) -> float:
    fn()  # warm-up (JIT compile / cache load)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_worker(repeats: int) -> None:
    import numpy as np

    from wranksim.backend import USING_NUMBA
    from wranksim.data import SynthConfig, generate, split
    from wranksim.model import MlpConfig, init
    from wranksim.numeric import seeded_rng
    from wranksim.ranking import blackbox_rank_grad, rank
    from wranksim.regularizer import OrdinalClassSet, ranksim_loss, w_ranksim_loss
    from wranksim.train import TrainConfig, RegularizerKind, train

    rng = seeded_rng(0)
    vec = rng.normal(size=256)
    upstream = rng.normal(size=256)
    W = rng.normal(size=(5, 512))
    classes = OrdinalClassSet.contiguous(5)
    feats = rng.normal(size=(32, 64))
    labels = rng.integers(0, 5, size=32)

    data = generate(SynthConfig(n_samples=400), seeded_rng(0), seed=0)
    splits = split(data, (0.8, 0.1, 0.1), seeded_rng(0))
    train_cfg = TrainConfig(regularizer=RegularizerKind.WRANKSIM, epochs=1, seed=0)

    def bench_train():
        model = init(MlpConfig(input_dim=8, init_seed=0))
        train(model, splits, train_cfg, seeded_rng(0))

    ops = {
        "rank (n=256, 100x)": lambda: [rank(vec) for _ in range(100)],
        "blackbox_rank_grad (n=256, 100x)":
            lambda: [blackbox_rank_grad(vec, upstream, 2.0) for _ in range(100)],
        "w_ranksim_loss (5x512, 100x)":
            lambda: [w_ranksim_loss(W, classes) for _ in range(100)],
        "ranksim_loss (32x64, 100x)":
            lambda: [ranksim_loss(feats, labels, rng=seeded_rng(1))
                     for _ in range(100)],
        "train epoch (n=400, mlp 128x64)": bench_train,
    }
    results = {name: _time(fn, repeats) for name, fn in ops.items()}
    json.dump({"numba": USING_NUMBA, "results": results}, sys.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per operation (best is kept)")
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        run_worker(args.repeats)
        return

    timings = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, WRANKSIM_NO_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--worker", "--repeats", str(args.repeats)],
            capture_output=True, text=True, env=env, check=True)
        payload = json.loads(proc.stdout)
        if label == "numba" and not payload["numba"]:
            print("note: numba unavailable; both columns use the numpy path")
        timings[label] = payload["results"]

    width = max(len(name) for name in timings["numba"])
    print(f"{'operation':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, with_numba in timings["numba"].items():
        plain = timings["numpy"][name]
        print(f"{name:<{width}}  {with_numba * 1e3:>8.2f}ms  "
              f"{plain * 1e3:>8.2f}ms  {plain / with_numba:>7.1f}x")


if __name__ == "__main__":
    main()
