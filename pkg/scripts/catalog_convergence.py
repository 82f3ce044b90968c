"""Default-parameter runs over the whole catalog: tracking, gaps, distances to S.

    python scripts/catalog_convergence.py --out results/catalog
"""
import dataclasses

import numpy as np

from _common import parser, write
from zosub.analysis import convergence_from_traces
from zosub.optimizer import RunConfig, run_many, tracking_windows
from zosub.problems import builtin_catalog


def main():
    args = parser(__doc__).parse_args()
    seeds = list(range(args.seeds))
    rows = ["problem,seed,track_head,track_tail,final_gap,tail_min_gap,tail_max_dist"]
    for entry in builtin_catalog():
        p = entry.problem
        cfg = dataclasses.replace(RunConfig(), problem=p.name, dim=p.dim, iterations=args.iterations)
        traces = run_many(cfg, seeds, args.jobs)
        rep = convergence_from_traces(cfg, traces, eps_gap=0.1)
        for tr, r in zip(traces, rep.rows):
            head, tail = tracking_windows(tr)
            dist = "" if r.tail_max_dist is None else f"{r.tail_max_dist:.6g}"
            rows.append(f"{entry.label},{r.seed},{head:.6g},{tail:.6g},{r.final_gap:.6g},{r.tail_min_gap:.6g},{dist}")
        wins = np.mean([t < h for h, t in map(tracking_windows, traces)])
        print(f"{entry.label:16s} tracking improves in {wins:.0%}, tail-min gap <= 0.1 in {rep.pass_fraction:.0%}")
        write(args.out, f"trace_{p.name}_d{p.dim}_seed0.csv", traces[0].to_csv())
    write(args.out, "catalog_summary.csv", "\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
