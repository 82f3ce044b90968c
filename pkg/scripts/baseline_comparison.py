"""Paired two-timescale versus single-timescale runs on identical draws.

    python scripts/baseline_comparison.py --out results/baseline
"""
import dataclasses

from _common import parser, write
from zosub.analysis import baseline_comparison
from zosub.optimizer import RunConfig


def main():
    ap = parser(__doc__)
    ap.add_argument("--problem", default="ABS")
    ap.add_argument("--lam", type=float, default=0.05)
    args = ap.parse_args()
    cfg = dataclasses.replace(RunConfig(), problem=args.problem, lam=args.lam, iterations=args.iterations)
    rep = baseline_comparison(cfg, range(args.seeds), jobs=args.jobs)
    write(args.out, f"baseline_{args.problem}_lam{args.lam:g}.csv", rep.to_csv())
    for line in rep.summary():
        print(line)


if __name__ == "__main__":
    main()
