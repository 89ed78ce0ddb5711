"""Compare the compiled and pure-Python echelon backends on the same rows.

Rows are generated once per workload, then fed to each backend, so only
elimination is timed.  Run from the repository root:

    python3 benchmarks/bench_echelon.py [--repeat 3]

Best of 3 on one core (2026-10):

    workload                                   cols    rows     python   compiled   speedup
    C2 block d=3 w=8 charge (0,0,0)             168     654     0.057s     0.017s       3.3x
    C2 block d=2 w=10 charge (0,0)              154     756     0.040s     0.011s       3.7x
    O(V) block d=2 cap=10 charge (0,0)          395    1552     1.350s     0.651s       2.1x
    random 300x300, 5% dense                    300     300    11.375s     3.168s       3.6x
"""

import argparse
import random
import time

from symfer.c2_poisson import c2_row_sources
from symfer.echelon import available_backends
from symfer.fock import Sector, basis_by_charge
from symfer.vertex import kernel
from symfer.zhu import circ_terms, zhu_row_sources


def c2_rows(d, w, ch):
    cols = basis_by_charge(d, Sector.UNTWISTED, 2 * w, True)[ch]
    index = {b: i for i, b in enumerate(cols)}
    ker = kernel(d)
    rows = []
    for a, n, v in c2_row_sources(d, w, ch):
        r = ker.product(a, n, {v: 1})
        if r:
            it = sorted((index[b], x) for b, x in r.items())
            rows.append(([k for k, _ in it], [int(x) for _, x in it]))
    return len(cols), rows


def zhu_rows(d, cap, ch):
    cols = []
    for w in range(cap, -1, -1):
        cols.extend(basis_by_charge(d, Sector.UNTWISTED, 2 * w, True).get(ch, ()))
    index = {b: i for i, b in enumerate(cols)}
    rows = []
    for W in range(cap + 1):
        for a, wa, n, v in zhu_row_sources(d, W, ch):
            r = circ_terms(d, a, wa, n, v)
            if r:
                it = sorted((index[b], x) for b, x in r.items())
                rows.append(([k for k, _ in it], [int(x) for _, x in it]))
    return len(cols), rows


def random_rows(n, m, density, seed=0):
    rng = random.Random(seed)
    rows = []
    for _ in range(m):
        ks = sorted(rng.sample(range(n), max(1, int(density * n))))
        rows.append((ks, [rng.randint(-9, 9) or 1 for _ in ks]))
    return n, rows


def run(cls, ncols, rows):
    e = cls(ncols)
    t0 = time.perf_counter()
    for ks, vs in rows:
        e.add(ks, vs)
        if e.rank == ncols:
            break
    return time.perf_counter() - t0, e.rank


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    workloads = {
        "C2 block d=3 w=8 charge (0,0,0)": lambda: c2_rows(3, 8, (0, 0, 0)),
        "C2 block d=2 w=10 charge (0,0)": lambda: c2_rows(2, 10, (0, 0)),
        "O(V) block d=2 cap=10 charge (0,0)": lambda: zhu_rows(2, 10, (0, 0)),
        "random 300x300, 5% dense": lambda: random_rows(300, 300, 0.05),
    }
    backends = available_backends()
    print(f"{'workload':40s} {'cols':>6s} {'rows':>7s} " + " ".join(f"{b:>10s}" for b in backends) + "   speedup")
    for name, make in workloads.items():
        ncols, rows = make()
        best, ranks = {}, set()
        for b, cls in backends.items():
            times = []
            for _ in range(args.repeat):
                t, r = run(cls, ncols, rows)
                times.append(t)
                ranks.add(r)
            best[b] = min(times)
        if len(ranks) != 1:
            raise SystemExit(f"backends disagree on rank for {name}: {ranks}")
        speed = f"{best['python'] / best['compiled']:8.1f}x" if "compiled" in best else "       -"
        print(f"{name:40s} {ncols:6d} {len(rows):7d} " + " ".join(f"{best[b]:9.3f}s" for b in backends) + f"  {speed}")


if __name__ == "__main__":
    main()
