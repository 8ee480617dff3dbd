#!/usr/bin/env python3

import argparse
import csv
import math
import sys

from collections import defaultdict

import numpy as np

from scipy.stats import binom

FIELDS = ["method", "budget", "runs", "median_log_z_error", "ci_low", "ci_high",
          "median_entropy_error", "median_decision_seconds_per_eval"]

def median_ci(values, confidence=0.95):
    '''
    Median with a distribution-free confidence interval from binomial order
    statistics.

      >>> median_ci([1.0, 2.0, 3.0, 4.0, 5.0])
      (3.0, 1.0, 5.0)
      >>> median_ci([])
      (nan, nan, nan)
    '''
    x = np.sort([v for v in values if not math.isnan(v)])
    n = len(x)
    if not n:
        return (math.nan, math.nan, math.nan)
    tail = (1.0 - confidence) / 2.0
    lo = int(binom.ppf(tail, n, 0.5))
    hi = int(binom.ppf(1.0 - tail, n, 0.5))
    lo, hi = max(lo - 1, 0), min(hi, n - 1)
    return (float(np.median(x)), float(x[lo]), float(x[hi]))

def summarize(rows):
    groups = defaultdict(list)
    for row in rows:
        groups[(row["method"], int(row["budget"]))].append(row)
    result = []
    for (method, budget), group in sorted(groups.items()):
        med, lo, hi = median_ci([float(r["log_z_error"]) for r in group])
        ent = median_ci([float(r["entropy_error"]) for r in group])[0]
        dec = median_ci([float(r["decision_seconds_per_eval"]) for r in group])[0]
        result.append([method, budget, len(group), med, lo, hi, ent, dec])
    return result

def main(argv=None):
    parser = argparse.ArgumentParser(description="Summarize bench.csv: medians with 95% intervals")
    parser.add_argument('bench', type=str, help='bench.csv written by defer bench')
    args = parser.parse_args(argv)
    try:
        with open(args.bench) as f:
            rows = list(csv.DictReader(f))
    except OSError as exp:
        print("ERROR: {}".format(exp), file=sys.stderr)
        return 2
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(FIELDS)
    for line in summarize(rows):
        writer.writerow(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
