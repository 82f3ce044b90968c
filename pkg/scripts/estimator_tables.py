"""Bias and second-moment tables for the two-point estimator on every catalog problem.

    python scripts/estimator_tables.py --out results/estimator
"""
import numpy as np

from _common import parser, write
from zosub.analysis import bias_experiment, moment_experiment
from zosub.problems import builtin_catalog


def main():
    ap = parser(__doc__)
    ap.add_argument("--reps", type=int, default=100_000)
    args = ap.parse_args()
    for i, entry in enumerate(builtin_catalog()):
        points = entry.constraint.sample(np.random.default_rng(100 + i), 10)
        bias = bias_experiment(entry.problem, points, [0.4, 0.2, 0.1, 0.05], max(args.reps // 10, 10_000), seed=i)
        moment = moment_experiment(entry.problem, points, [0.5, 0.1, 0.02], args.reps, sigma=0.1, seed=i)
        tag = f"{entry.problem.name}_d{entry.problem.dim}"
        write(args.out, f"bias_{tag}.csv", bias.to_csv())
        write(args.out, f"moment_{tag}.csv", moment.to_csv())
        for line in moment.summary():
            print(line)


if __name__ == "__main__":
    main()
