#!/usr/bin/env python3
"""Export (and optionally plot) the fractal time staircases of high-order
schedules, comparing r=3 against r=5 at the same order.

The r=3 construction uses coefficients larger than 1, so its cumulative
time makes wide excursions and revisits negative times; for r=5 the
coefficients shrink like (r-2)^-m and the staircase stays much tighter.
"""

import argparse
import os

from trotterforge.schedule import (
    merge_adjacent,
    path_trace,
    suzuki_schedule,
    write_path_trace,
    write_schedule,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--k", type=int, default=2)
    parser.add_argument("--order", type=int, default=9)
    parser.add_argument("--out", default="fractal_paths")
    parser.add_argument("--plot", action="store_true", help="also write a PNG")
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    traces = {}
    for r in (3, 5):
        sched = suzuki_schedule(args.k, args.order, r)
        merged = merge_adjacent(sched)
        print(
            f"r={r}: {len(sched)} raw entries, {len(merged)} merged factors, "
            f"order label {args.order}"
        )
        write_schedule(sched, os.path.join(args.out, f"schedule_r{r}.txt"))
        trace = path_trace(sched)
        write_path_trace(trace, os.path.join(args.out, f"paths_r{r}.csv"))
        traces[r] = trace

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, axes = plt.subplots(1, 2, figsize=(11, 4), sharey=False)
        for ax, r in zip(axes, (3, 5)):
            for layer, seq in traces[r].sequences.items():
                ax.step(range(len(seq)), seq, where="post", label=f"layer {layer}")
            ax.axhline(0.0, color="grey", lw=0.5)
            ax.set_title(f"r = {r}")
            ax.set_xlabel("substep")
            ax.set_ylabel("cumulative time / mu")
            ax.legend()
        fig.tight_layout()
        png = os.path.join(args.out, "fractal_paths.png")
        fig.savefig(png, dpi=150)
        print(f"wrote {png}")


if __name__ == "__main__":
    main()
