'''
Baseline comparison harness.  Every (method, budget, seed) cell runs with
its own density instance and random stream and reports the absolute error of
log Z and of the entropy against an oracle.
'''

import math
import time

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from scipy.special import logsumexp

from lace import logging
from lace.logging import trace

from libdefer.density import TargetSpec, makeDensity
from libdefer.engine import Engine, EngineConfig
from libdefer.exceptions import ConfigurationError
from libdefer.result import BenchRow
from libdefer.util import rng as streams

METHODS = ("defer", "rejection_uniform", "grid")
GRID_LIMIT = 10 ** 8
GRID_CHUNK = 1 << 16

Oracle = namedtuple('Oracle', ['log_z', 'entropy'])

log = logging.getLogger('libdefer')


def _grid_axis(n):
    return (np.arange(n) + 0.5) / n

def grid_estimate(density, domain, per_dim):
    '''
    Midpoint rule on a per_dim^D grid over the domain.  Returns the log
    evidence and the entropy of the piecewise-constant grid density.
    '''
    dim = domain.dim
    total = per_dim ** dim
    if total > GRID_LIMIT:
        raise ConfigurationError("grid of {}^{} points exceeds {} evaluations".format(per_dim, dim, GRID_LIMIT))
    axis = _grid_axis(per_dim)

    def chunks():
        for start in range(0, total, GRID_CHUNK):
            idx = np.arange(start, min(start + GRID_CHUNK, total))
            cells = np.stack(np.unravel_index(idx, (per_dim,) * dim), axis=1)
            yield density.log_density(domain.from_unit(axis[cells]))

    log_sum = logsumexp([logsumexp(c) for c in chunks()])
    log_cell = domain.log_volume - math.log(total)
    if log_sum == -math.inf:
        return Oracle(-math.inf, math.nan)
    plogp = []
    for c in chunks():
        lp = c - log_sum
        p = np.exp(lp)
        plogp.append(float(np.sum(np.where(p > 0, p * lp, 0.0))))
    return Oracle(float(log_sum + log_cell), log_cell - math.fsum(plogp))

def uniform_estimate(density, domain, n, rng):
    ''' Plain Monte Carlo with uniform proposals, self-normalized entropy '''
    points = domain.from_unit(rng.random((n, domain.dim)))
    values = np.asarray(density.log_density(points), dtype=float)
    log_sum = logsumexp(values)
    if log_sum == -math.inf:
        return Oracle(-math.inf, math.nan)
    log_z = float(log_sum - math.log(n) + domain.log_volume)
    w = np.exp(values - log_sum)
    entropy = -float(np.sum(np.where(w > 0, w * (values - log_z), 0.0)))
    return Oracle(log_z, entropy)


@trace.info("bench")
def parse_oracle(text):
    '''
    "analytic:<log Z>[:<entropy>]" or "grid:<points per dimension>"
    '''
    kind, _, rest = (text or "").partition(":")
    try:
        if kind == "analytic":
            parts = rest.split(":")
            return ("analytic", float(parts[0]), float(parts[1]) if len(parts) > 1 else math.nan)
        if kind == "grid":
            n = int(rest)
            if n < 1:
                raise ValueError(rest)
            return ("grid", n)
    except (ValueError, IndexError):
        pass
    raise ConfigurationError("malformed oracle {!r} - expected analytic:<value> or grid:<n>".format(text))

def default_oracle(target, domain):
    if target == "uniform":
        return ("analytic", 0.0 if domain is None else domain.log_volume,
                0.0 if domain is None else domain.log_volume)
    if target == "mog4":
        return ("analytic", math.log(3.5), math.nan)
    raise ConfigurationError("target '{}' has no built-in oracle, pass --oracle".format(target))

def resolve_oracle(oracle, density, domain):
    if oracle[0] == "analytic":
        return Oracle(oracle[1], oracle[2])
    return grid_estimate(density, domain, oracle[1])


class Bench(object):
    '''
    Cells of the comparison grid.  The target is rebuilt per seed so that
    seed-dependent parameters (Student's t means) follow the cell.
    '''
    def __init__(self, target, dim, domain, budgets, seeds, oracle, methods=METHODS,
                 criteria=None, params=None, record_timing=True, threads=1):
        unknown = set(methods) - set(METHODS)
        if unknown:
            raise ConfigurationError("unknown bench methods {}".format(sorted(unknown)))
        self.target, self.dim, self.domain = target, dim, domain
        self.budgets, self.seeds = list(budgets), list(seeds)
        self.oracle, self.methods = oracle, list(methods)
        self.criteria, self.params = criteria, dict(params or {})
        self.record_timing, self.threads = record_timing, max(1, int(threads))
        self._oracles = {}

    def density(self, seed):
        return makeDensity(TargetSpec(self.target, self.dim, self.params, seed=seed))

    def oracle_for(self, seed):
        key = seed if self.target == "student_t" else None
        if key not in self._oracles:
            with self.density(seed) as density:
                self._oracles[key] = resolve_oracle(self.oracle, density, self.domain)
        return self._oracles[key]

    @trace.debug("Bench")
    def cell(self, method, budget, seed):
        truth = self.oracle_for(seed)
        with self.density(seed) as density:
            estimate, seconds, evals = self._estimate(density, method, budget, seed)
        row = BenchRow(method, budget, seed, _error(estimate.log_z, truth.log_z),
                       _error(estimate.entropy, truth.entropy),
                       seconds / evals if self.record_timing else 0.0)
        log.info("Bench cell [{}, {}, {}] log_z_error={}".format(method, budget, seed, row.log_z_error))
        return row

    def _estimate(self, density, method, budget, seed):
        start = time.perf_counter()
        if method == "defer":
            engine = Engine(density, self.domain, EngineConfig(budget, seed=seed, criteria=self.criteria,
                                                               record_timing=self.record_timing))
            result = engine.run()
            estimate = Oracle(result.timeline[-1].log_z, result.timeline[-1].entropy)
            seconds, evals = engine.decision_seconds, result.tree.eval_count
        elif method == "grid":
            per_dim = max(1, int(math.floor(budget ** (1.0 / self.dim) + 1e-9)))
            estimate = grid_estimate(density, self.domain, per_dim)
            seconds, evals = time.perf_counter() - start, per_dim ** self.dim
        else:
            rng = streams.stream(seed, streams.BENCH, METHODS.index(method), budget)
            estimate = uniform_estimate(density, self.domain, budget, rng)
            seconds, evals = time.perf_counter() - start, budget
        return estimate, seconds, evals

    @trace.info("Bench")
    def run(self):
        cells = [(m, b, s) for m in self.methods for b in self.budgets for s in self.seeds]
        for s in self.seeds:
            self.oracle_for(s)
        if self.threads == 1:
            rows = [self.cell(*c) for c in cells]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                rows = list(executor.map(lambda c: self.cell(*c), cells))
        return sorted(rows, key=lambda r: (r.method, r.budget, r.seed))


def _error(estimate, truth):
    if math.isnan(truth) or math.isnan(estimate):
        return math.nan
    if estimate == truth:
        return 0.0
    return abs(estimate - truth)

def dumps_rows(rows):
    lines = [",".join(BenchRow._fields)]
    for r in rows:
        lines.append(",".join([r.method, str(r.budget), str(r.seed)] +
                              [repr(float(v)) for v in (r.log_z_error, r.entropy_error, r.decision_seconds_per_eval)]))
    return "\n".join(lines) + "\n"
