"""Re-run the stability-based lambda selection behind the frozen suite lambdas.

Each suite's scenario is generated once from a held-out seed (never used by
the benchmark substreams) and ``tune_lambda`` picks from a fixed grid.
"""

import argparse
import json

from ewp.datagen import gen_feature_sel, gen_sim1, gen_sim2
from ewp.harness import tune_lambda

HELD_OUT_SEED = 20240917

CASES = {
    "table1/d=20": (lambda: gen_sim1(20, HELD_OUT_SEED), [3, 10, 30, 100, 300]),
    "table2/k=20": (lambda: gen_sim2(20, HELD_OUT_SEED), [10, 30, 100, 300, 1000]),
    "table2/k=100": (lambda: gen_sim2(100, HELD_OUT_SEED), [100, 300, 1000, 3000]),
    "featsel": (lambda: gen_feature_sel(HELD_OUT_SEED), [3, 10, 30, 100, 300]),
}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("cases", nargs="*", default=list(CASES))
    args = parser.parse_args()
    for name in args.cases:
        make, grid = CASES[name]
        ds = make()
        result = tune_lambda(ds.data, ds.k, grid, folds=2, seed=HELD_OUT_SEED)
        print(json.dumps({"case": name, "chosen": result.chosen, "table": result.rows()}))


if __name__ == "__main__":
    main()
