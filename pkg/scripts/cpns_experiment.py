#!/usr/bin/env python3
"""SI fidelity of SS and uniform sparsifiers on one synthetic network.

Writes one CSV per metric (baseline plus every strategy/fraction series) and
prints, for each series, the share of timesteps inside the baseline 95% CI.

    python3 scripts/cpns_experiment.py --family sbm4 --n 500 --out results/sbm
"""

import argparse
from pathlib import Path

from cpns.contagion import si_runs
from cpns.generators import FAMILIES, GeneratorSpec, generate
from cpns.metrics import METRICS, baseline, compare_series, write_series_csv
from cpns.seeding import derive_seed, run_rng
from cpns.sparsify import q_for_fraction, ss_sample, uniform_sample
from cpns.spectral import exact_resistance


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--family", choices=FAMILIES, default="sbm4")
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--gamma", type=float, default=0.01)
    ap.add_argument("--timesteps", type=int, default=200)
    ap.add_argument("--runs", type=int, default=100)
    ap.add_argument("--draws", type=int, default=10)
    ap.add_argument("--cpns-runs", type=int, default=10)
    ap.add_argument("--fractions", type=float, nargs="+", default=[0.25, 0.5, 0.75])
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()

    g = generate(GeneratorSpec(args.family, args.n, seed=args.seed))
    sk = exact_resistance(g)
    pz = int(run_rng(args.seed, 0xC0FFEE).integers(g.n))
    print(f"{args.family} n={g.n} m={g.m}, patient zero {pz}")
    orig = si_runs(g, args.gamma, args.timesteps, pz, args.runs, args.seed, stream=0, workers=args.workers)

    groups = {}
    stream = 1
    for k, frac in enumerate(args.fractions):
        for strategy in ("ss", "uniform"):
            p = sk.leverage if strategy == "ss" else [1.0] * g.m
            q = q_for_fraction(g, p, frac)
            runs = []
            for d in range(args.draws):
                seed = derive_seed(args.seed, k, d)
                sp = ss_sample(g, sk, q, seed) if strategy == "ss" else uniform_sample(g, q, seed)
                runs += si_runs(sp.graph, args.gamma, args.timesteps, pz, args.cpns_runs, args.seed,
                                stream=stream, workers=args.workers)
                stream += 1
            groups[f"{strategy}-{round(frac * 100):02d}"] = runs

    args.out.mkdir(parents=True, exist_ok=True)
    for metric in METRICS:
        base = baseline(orig, metric)
        series = [base]
        for label, runs in groups.items():
            s = compare_series(orig, runs, metric, label=label)
            series.append(s)
            print(f"{metric:8s} {label:12s} within CI {s.within(base).mean():.3f}")
        write_series_csv(series, args.out / f"{metric}.csv")


if __name__ == "__main__":
    main()
