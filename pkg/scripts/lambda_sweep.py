"""Tail stationarity gap against the smoothing parameter on ABS and NNL1.

    python scripts/lambda_sweep.py --out results/sweep --seeds 20
"""
import dataclasses

from _common import parser, write
from zosub.analysis import lambda_sweep
from zosub.optimizer import RunConfig


def main():
    args = parser(__doc__).parse_args()
    for name in ("ABS", "NNL1"):
        cfg = dataclasses.replace(RunConfig(), problem=name, iterations=args.iterations)
        rep = lambda_sweep(cfg, [0.4, 0.1, 0.05], range(args.seeds), jobs=args.jobs)
        write(args.out, f"sweep_{name}.csv", rep.to_csv())
        print(name)
        for line in rep.summary():
            print(line)


if __name__ == "__main__":
    main()
