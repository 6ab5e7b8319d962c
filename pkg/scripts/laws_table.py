#!/usr/bin/env python3
"""Solve every built-in family and tabulate its growth law.

Prints a markdown table: tail class, x1, the natural law, the tail-window
mean ratio of numeric/predicted, and the convergence verdict.  This is
the summary experiment behind the package's claims; expect a minute.
"""

from __future__ import annotations

import argparse
import time

import lsp_lab as L
from lsp_lab import asymptotics as A
from lsp_lab.verify import compare

CASES = [
    # spec, k_max, law, window
    ("exponential:1", 210, A.LAW_INCREMENT, (50, 200)),
    ("stretchedexp:1,1", 310, A.LAW_INCREMENT, (100, 300)),
    ("lognormal:1", 120, A.LAW_INCREMENT, (40, 110)),
    ("gumbel:1", 120, A.LAW_INCREMENT, (40, 110)),
    ("logboundary:2", 210, A.LAW_INCREMENT, (100, 200)),
    ("lomax:3", 90, A.LAW_PARETO_RATE, (20, 60)),
    ("lomax:2", 90, A.LAW_PARETO_RATE, (20, 60)),
    ("triangular", 60, A.LAW_COMPACT_RESIDUAL, (5, 18)),
    ("compactpower:3", 60, A.LAW_COMPACT_RESIDUAL, (5, 18)),
    ("compactfast:1,1", 160, A.LAW_CLOSED_FORM, (50, 150)),
    ("uniform", 10, None, None),
]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="shrink horizons to smoke-test the pipeline")
    args = parser.parse_args()

    print("| density | class | x1 | law | mean ratio | verdict | secs |")
    print("|---|---|---|---|---|---|---|")
    for spec, k_max, law, window in CASES:
        t0 = time.time()
        model = L.parse_spec(spec)
        if args.quick:
            k_max = min(k_max, 40)
            window = (10, max(20, min(window[1], 39))) if window else None
        tail = L.classify_tail(model)
        seq = L.solve(model, L.SolverConfig(k_max=k_max, cross_check=False))
        x1 = seq.points[1]
        if law is None or seq.terminated:
            print(f"| {spec} | {tail.kind} | {x1:.6f} | terminates | - | - "
                  f"| {time.time() - t0:.1f} |")
            continue
        ks = range(window[0], window[1] + 1)
        pred = A.predict_sequence(model, law, ks, sequence=seq)
        rep = compare(seq, pred, window)
        print(f"| {spec} | {tail.kind} | {x1:.6f} | {law} "
              f"| {rep.mean_ratio:.4f} | {rep.verdict} | {time.time() - t0:.1f} |")


if __name__ == "__main__":
    main()
