"""Compare the numba and pure-numpy kernel paths.

Each path runs in its own interpreter, because ``BDARCH_DISABLE_NUMBA`` is
read at import. Timings are per log-posterior-plus-gradient evaluation, the
unit of work of every leapfrog step.

    python benchmarks/bench_kernels.py [--T 60] [--repeat 2000]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from bdarch._jit import USE_NUMBA
from bdarch.model import ModelSpec, Posterior, Priors

T, repeat = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
y = rng.dirichlet(np.full(5, 20.0), size=T)
orders = {
    "BDARMA(1,0)": ("BDARMA", dict(P=1)),
    "BDARMA(1,0)-DARCH(1,1)": ("BDARMA_DARCH", dict(P=1, L=1, K=1)),
    "BDARMA(2,2)-DARCH(1,1)": ("BDARMA_DARCH", dict(P=2, Q=2, L=1, K=1)),
    "BtVARMA(1,0)": ("BTVARMA", dict(P=1)),
}
out = {"numba": USE_NUMBA, "timings_us": {}}
for label, (variant, kw) in orders.items():
    post = Posterior(ModelSpec(variant, 5, **kw), Priors.simulation(), y)
    th = rng.uniform(-0.3, 0.3, post.dim)
    if post.spec.variant.dirichlet:
        th[post.layout.slices["gamma"]] = 5.0
    post.logp_grad(th)  # compile / warm caches
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            post.logp_grad(th)
        best = min(best, (time.perf_counter() - t0) / repeat)
    out["timings_us"][label] = best * 1e6
print(json.dumps(out))
"""


def run(disable: bool, T: int, repeat: int) -> dict:
    env = dict(os.environ, BDARCH_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(T), str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=60, help="series length")
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--json", help="also write the results here")
    args = ap.parse_args(argv)

    fast = run(False, args.T, args.repeat)
    slow = run(True, args.T, args.repeat)
    print(f"log posterior + gradient, J=5, T={args.T} (best of 3, microseconds per call)")
    print(f"{'model':<26}{'numba':>10}{'numpy':>10}{'speedup':>9}")
    for label, t_fast in fast["timings_us"].items():
        t_slow = slow["timings_us"][label]
        print(f"{label:<26}{t_fast:>10.1f}{t_slow:>10.1f}{t_slow / t_fast:>8.1f}x")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"numba": fast, "numpy": slow, "T": args.T}, fh, indent=2)


if __name__ == "__main__":
    main()
