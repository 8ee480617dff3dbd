#!/usr/bin/env python3

import argparse
import json
import math
import os
import platform
import sys

import numpy as np

from lace import logging

from libdefer import dump, queries
from libdefer.config import RunConfig, merge, read_config
from libdefer.engine import Engine
from libdefer.exceptions import (ConfigurationError, DepthLimitError, EvaluationError,
                                 InvariantError, OutOfDomainError, ZeroMassError)
from libdefer.settings import BENCH_FILE, META_FILE, PARTITIONS_FILE, SAMPLES_FILE, TIMELINE_FILE, VERSION
from libdefer.util import rng as streams
from libdefer.util.common import progress_printer
from libdefer.util.util import human2count
from tools import bench

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

QUERIES = ("density", "evidence", "entropy", "subregion", "marginal", "conditional")


def _count(text):
    try:
        return human2count(text)
    except ValueError as exp:
        raise argparse.ArgumentTypeError(str(exp))

def _counts(text):
    return [_count(x) for x in text.replace(",", " ").split()]

def _number(x):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x

def add_common(parser):
    parser.add_argument('-T', '--target', type=str, default=None,
                        help='Target density: uniform, gaussian, student_t, canoe, mog4, cigar or external')
    parser.add_argument('-n', '--dims', type=int, default=None,
                        help='Number of dimensions')
    parser.add_argument('-s', '--seed', type=int, default=None,
                        help='Run seed')
    parser.add_argument('-o', '--out', type=str, default=None,
                        help='Output directory')
    parser.add_argument('--beta', type=float, default=None,
                        help='Upper-bound mass threshold factor (default 1)')
    parser.add_argument('--alpha', type=float, default=None,
                        help='High-mass threshold factor (default 20)')
    parser.add_argument('--phi', type=float, default=None,
                        help='Neighbourhood ball diameter factor (default 1.2)')
    parser.add_argument('--big-m', type=int, default=None,
                        help='Size of the high-mass set (default min(5, D))')
    parser.add_argument('--l', type=int, default=None,
                        help='Random points per affine hull (default 1)')
    parser.add_argument('--b', type=int, default=None,
                        help='Ball points per high-mass leaf (default D)')
    parser.add_argument('--no-cr2', dest='cr2', action='store_const', const=False, default=None,
                        help='Disable the affine-hull criterion')
    parser.add_argument('--no-cr3', dest='cr3', action='store_const', const=False, default=None,
                        help='Disable the neighbourhood criterion')
    parser.add_argument('--no-timing', dest='timing', action='store_const', const=False, default=None,
                        help='Write zero timing columns for reproducible output')
    parser.add_argument('--external-cmd', type=str, default=None,
                        help='Command implementing the external density protocol')
    parser.add_argument('--workers', type=int, default=None,
                        help='Number of external density processes')
    parser.add_argument('--scale', type=float, default=None,
                        help='Standard deviation of the gaussian target')
    parser.add_argument('--lower', type=float, nargs='+', default=None,
                        help='Lower domain bounds (default 0)')
    parser.add_argument('--upper', type=float, nargs='+', default=None,
                        help='Upper domain bounds (default 1)')
    parser.add_argument('-c', '--config', type=str, default=None,
                        help='Config file of key = value lines, flags take precedence')

def build_parser():
    parser = argparse.ArgumentParser(prog='defer', description="Black-box density estimation by ternary partitioning")
    parser.add_argument('-D', '--debug', type=str, default=None,
                        help='Include verbose logging output [TRACE|DEBUG]')
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    run = commands.add_parser('run', help='Estimate a target and write timeline, partitions and metadata')
    add_common(run)
    run.add_argument('-N', '--budget', type=_count, default=None,
                     help='Number of density evaluations, e.g. 100k')
    run.add_argument('--checkpoint-every', type=_count, default=None,
                     help='Additional checkpoint interval in evaluations')
    run.add_argument('--checkpoints', type=_counts, default=None,
                     help='Additional fixed checkpoints, comma separated')

    sample = commands.add_parser('sample', help='Draw samples from a partition dump')
    sample.add_argument('tree', type=str, help='Partition dump (partitions.jsonl)')
    sample.add_argument('-k', '--count', type=_count, default=1000, help='Number of samples')
    sample.add_argument('-s', '--seed', type=int, default=0, help='Sampling seed')
    sample.add_argument('-o', '--out', type=str, default='.', help='Output directory')
    sample.add_argument('--lo', type=float, nargs='+', default=None, help='Lower corner of a sampling region')
    sample.add_argument('--hi', type=float, nargs='+', default=None, help='Upper corner of a sampling region')

    query = commands.add_parser('query', help='Answer a query on a partition dump')
    query.add_argument('tree', type=str, help='Partition dump (partitions.jsonl)')
    query.add_argument('query', type=str, choices=QUERIES)
    query.add_argument('--at', type=float, nargs='+', default=None, help='Query point or fixed values')
    query.add_argument('--lo', type=float, nargs='+', default=None, help='Lower corner of the region')
    query.add_argument('--hi', type=float, nargs='+', default=None, help='Upper corner of the region')
    query.add_argument('--dims', type=int, nargs='+', default=None, help='Kept (marginal) or fixed (conditional) dimensions')

    bch = commands.add_parser('bench', help='Compare against uniform-sampling and grid baselines')
    add_common(bch)
    bch.add_argument('--budgets', type=_counts, default=[1000, 10000], help='Budgets, comma separated')
    bch.add_argument('--seeds', type=int, default=5, help='Number of seeds per budget')
    bch.add_argument('--methods', type=str, default=','.join(bench.METHODS), help='Methods, comma separated')
    bch.add_argument('--oracle', type=str, default=None, help='analytic:<log Z>[:<entropy>] or grid:<points per dim>')
    bch.add_argument('-t', '--threads', type=int, default=1, help='Worker threads for bench cells')
    return parser

def configure_logging(level):
    if level in ['TRACE', 'DEBUG']:
        import logging as plogging
        plogging.basicConfig(format='%(color)s[%(asctime)-15s] [%(levelname)s] %(name)s%(reset)s %(message)s')
        log = logging.getLogger('libdefer')
        log.setLevel(logging.DEBUG)
        if level == 'TRACE':
            from lace.logging import trace
            trace.setLevel(logging.DEBUG, True)

def _flags(args, keys):
    return {k: getattr(args, k, None) for k in keys}

COMMON_KEYS = ("target", "dims", "seed", "out", "beta", "alpha", "phi", "big_m", "l", "b",
               "cr2", "cr3", "timing", "external_cmd", "workers", "scale", "lower", "upper")

def _values(args, extra=()):
    values = read_config(args.config) if args.config else {}
    return merge(values, _flags(args, COMMON_KEYS + tuple(extra)))


def cmd_run(args):
    config = RunConfig(_values(args, ("budget", "checkpoint_every", "checkpoints")))
    dump.prepare_output(config.out)
    progress = progress_printer(prefix=config.target.name)
    with config.density() as density:
        engine = Engine(density, config.domain, config.engine)
        result = engine.run(progress)

    final = result.timeline[-1]
    meta = {
        "versions": {"libdefer": VERSION, "numpy": np.__version__, "python": platform.python_version()},
        "seed": config.seed,
        "config": config.echo(),
        "target": config.target.to_dict(),
        "criteria": config.criteria.to_dict(),
        "domain": {"lower": config.domain.lower.tolist(), "upper": config.domain.upper.tolist()},
        "evals": result.tree.eval_count,
        "leaves": result.tree.leaf_count,
        "log_z": _number(final.log_z),
        "entropy": _number(final.entropy),
        "unique_keys": final.unique_keys,
        "decision_seconds": final.decision_seconds,
        "decision_seconds_per_eval": final.decision_seconds / result.tree.eval_count,
    }
    dump.write_timeline(result.timeline, os.path.join(config.out, TIMELINE_FILE))
    dump.write_partitions(result.tree, os.path.join(config.out, PARTITIONS_FILE))
    dump.write_meta(meta, os.path.join(config.out, META_FILE))
    print(json.dumps({"evals": meta["evals"], "log_z": meta["log_z"], "entropy": meta["entropy"],
                      "unique_keys": meta["unique_keys"], "out": config.out}))
    return EXIT_OK

def cmd_sample(args):
    dump.prepare_output(args.out)
    tree, aggregates = dump.read_partitions(args.tree)
    region = None
    if args.lo is not None or args.hi is not None:
        region = (tree.domain.lower if args.lo is None else args.lo, tree.domain.upper if args.hi is None else args.hi)
    sampler = queries.build_sampler(tree, aggregates, region=region)
    points = queries.sample(sampler, tree, streams.stream(args.seed, streams.SAMPLE), args.count)
    path = dump.write_samples(points, tree.domain.dim, os.path.join(args.out, SAMPLES_FILE))
    print(json.dumps({"samples": len(points), "out": path}))
    return EXIT_OK

def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise ConfigurationError("query '{}' requires --{}".format(args.query, name))

def cmd_query(args):
    tree, aggregates = dump.read_partitions(args.tree)
    q = args.query
    if q == "evidence":
        result = queries.evidence(tree, aggregates)
        record = {"value": _number(result.z_hat), "log_value": _number(result.log_z_hat), "all_zero": result.all_zero}
    elif q == "entropy":
        record = {"value": _number(queries.entropy(tree, aggregates))}
    elif q == "density":
        _require(args, "at")
        record = {"value": _number(queries.density(tree, aggregates, args.at))}
    elif q == "subregion":
        _require(args, "lo", "hi")
        result = queries.subregion_mass(tree, aggregates, args.lo, args.hi)
        record = {"mass": _number(result.mass), "probability": _number(result.probability)}
    elif q == "marginal":
        _require(args, "dims", "at")
        record = {"value": _number(queries.marginal_density(tree, aggregates, args.dims, args.at))}
    else:
        _require(args, "dims", "at")
        pieces = queries.conditional_slice(tree, aggregates, args.dims, args.at)
        record = {"pieces": [dict(p._asdict(), density=_number(p.density)) for p in pieces]}
    args_echo = {k: getattr(args, k) for k in ("at", "lo", "hi", "dims") if getattr(args, k) is not None}
    print(json.dumps(dict({"query": q, "args": args_echo}, **record)))
    return EXIT_OK

def cmd_bench(args):
    values = _values(args)
    values.setdefault("budget", max(args.budgets))
    config = RunConfig(values)
    dump.prepare_output(config.out)
    oracle = bench.parse_oracle(args.oracle) if args.oracle else bench.default_oracle(config.target.name, config.domain)
    harness = bench.Bench(config.target.name, config.dim, config.domain, args.budgets,
                          [config.seed + i for i in range(args.seeds)], oracle,
                          methods=[m.strip() for m in args.methods.split(",") if m.strip()],
                          criteria=config.criteria, params=config.target.params,
                          record_timing=config.record_timing, threads=args.threads)
    rows = harness.run()
    path = dump.write_atomic(os.path.join(config.out, BENCH_FILE), bench.dumps_rows(rows))
    print(json.dumps({"rows": len(rows), "out": path}))
    return EXIT_OK

COMMANDS = {"run": cmd_run, "sample": cmd_sample, "query": cmd_query, "bench": cmd_bench}

def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.debug)
    log = logging.getLogger('libdefer')
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, OutOfDomainError) as exp:
        log.warn(exp)
        print("ERROR: {}".format(exp), file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exp:
        log.warn(exp)
        print("ERROR: {}".format(exp), file=sys.stderr)
        return EXIT_CONFIG
    except (EvaluationError, DepthLimitError, ZeroMassError, InvariantError) as exp:
        log.warn(exp)
        print("ERROR: {}".format(exp), file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
