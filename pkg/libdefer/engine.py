'''
The estimation loop.  Every step selects leaves through the division
criteria, evaluates the density at the centroids of their new children in a
single batch and updates the leaf index and the evidence aggregates.
'''

import heapq
import math
import time

from fractions import Fraction

import numpy as np

from lace import logging
from lace.logging import trace
from shewchuk import Expansion

from libdefer import queries
from libdefer.criteria import CriteriaConfig, select_to_divide
from libdefer.criteria.index import LeafIndex
from libdefer.exceptions import ConfigurationError, DepthLimitError, EvaluationError, InvariantError
from libdefer.partition import LOG3, TernaryBox, create_root, depth_key, trisect_geometry, unit_centroid
from libdefer.result import Checkpoint, RunResult
from libdefer.schedule import FixedSchedule, GeometricSchedule, IntervalSchedule, UnionSchedule
from libdefer.settings import MAX_DEPTH, OFFSET_REBASE, ZHAT_TOLERANCE
from libdefer.util import rng as streams
from libdefer.util.ranking import near, tie_ranked


class Aggregates(object):
    '''
    Running evidence of the live leaves in normalized units.

    A leaf at depth sum s with log-density l has mass g * 3^-s where
    g = exp(l + log_offset).  The g values of every depth sum are kept in an
    exact floating point expansion, so inclusion and exclusion cancel
    exactly and the total only rounds once, when the levels are combined.
    '''
    def __init__(self):
        self.log_offset = 0.0
        self._anchored = False
        self._levels = {}
        self._counts = {}
        self._live = {}
        self._heap = []
        self._z_hat = None
        self.log = logging.getLogger('libdefer')

    def __len__(self):
        return len(self._live)

    def __contains__(self, node_id):
        return node_id in self._live

    @classmethod
    def from_tree(cls, tree):
        aggregates = cls()
        for nid in tree.leaves():
            aggregates.include(nid, sum(tree.box(nid).depths), tree.log_f(nid))
        return aggregates

    def _g(self, log_f):
        return math.exp(log_f + self.log_offset)

    def include(self, node_id, level, log_f):
        if node_id in self._live:
            raise InvariantError("node {} is already counted in the evidence".format(node_id), node=node_id)
        self._live[node_id] = (level, log_f)
        if not self._anchored and math.isfinite(log_f):
            self.log_offset, self._anchored = -log_f, True
        elif log_f + self.log_offset > OFFSET_REBASE:
            self.rebase(-log_f)
            return
        self._levels[level] = self._levels.get(level, Expansion()) + self._g(log_f)
        self._counts[level] = self._counts.get(level, 0) + 1
        heapq.heappush(self._heap, (level * LOG3 - log_f, node_id))
        self._z_hat = None

    def exclude(self, node_id):
        try:
            level, log_f = self._live.pop(node_id)
        except KeyError:
            raise InvariantError("node {} is not counted in the evidence".format(node_id), node=node_id)
        self._counts[level] -= 1
        if self._counts[level]:
            self._levels[level] = self._levels[level] - self._g(log_f)
        else:
            del self._counts[level]
            del self._levels[level]
        self._z_hat = None

    @trace.debug("Aggregates")
    def rebase(self, log_offset):
        self.log.debug("Rebasing evidence offset {} -> {}".format(self.log_offset, log_offset))
        self.log_offset = log_offset
        self.recompute()

    @trace.debug("Aggregates")
    def recompute(self):
        ''' Rebuild every level from the live leaves, returns the previous Ẑ '''
        previous = self.z_hat if self._levels else 0.0
        self._levels, self._counts = {}, {}
        for level, log_f in self._live.values():
            self._levels[level] = self._levels.get(level, Expansion()) + self._g(log_f)
            self._counts[level] = self._counts.get(level, 0) + 1
        self._heap = [(level * LOG3 - log_f, nid) for nid, (level, log_f) in self._live.items()]
        heapq.heapify(self._heap)
        self._z_hat = None
        return previous

    @property
    def z_hat(self):
        if self._z_hat is None:
            top = max(self._levels, default=0)
            total = sum((Fraction(float(g)) * 3 ** (top - level) for level, g in self._levels.items()), Fraction(0)) / 3 ** top
            if total < 0:
                raise InvariantError("evidence went negative - {}".format(float(total)))
            self._z_hat = float(total)
        return self._z_hat

    @property
    def log_z_hat(self):
        ''' log Ẑ in normalized units with the offset removed '''
        z = self.z_hat
        return math.log(z) - self.log_offset if z > 0 else -math.inf

    def log_mass(self, node_id):
        level, log_f = self._live[node_id]
        return log_f + self.log_offset - level * LOG3

    def mass(self, node_id):
        return math.exp(self.log_mass(node_id))

    def leaf_ids(self):
        return sorted(self._live)

    def _tied(self, key):
        return math.isfinite(key) and near(key, self._heap[0][0])

    def top(self, m):
        '''
        The `m` live leaves of largest mass as (node_id, mass), followed by
        every leaf whose mass equals the last one up to rounding.
        '''
        found, popped = [], []
        while self._heap and (len(found) < m or self._tied(popped[-1][0])):
            entry = heapq.heappop(self._heap)
            if entry[1] in self._live:
                popped.append(entry)
                found.append((entry[1], self.mass(entry[1])))
        for entry in popped:
            heapq.heappush(self._heap, entry)
        return found


@trace.debug("engine")
def update_aggregates(aggregates, include, exclude):
    '''
    Apply (node_id, level, log_f) inclusions and exclusions.  A negative
    total beyond tolerance forces a full recompute and aborts when the
    recomputed total is still negative.
    '''
    for entry in exclude:
        node_id = entry[0] if isinstance(entry, tuple) else entry
        aggregates.exclude(node_id)
    for node_id, level, log_f in include:
        aggregates.include(node_id, level, log_f)
    try:
        aggregates.z_hat
    except InvariantError:
        aggregates.recompute()
        aggregates.z_hat
    return aggregates


class EngineConfig(object):
    @trace.debug("EngineConfig")
    def __init__(self, budget, seed=0, criteria=None, checkpoint_every=None, checkpoints=(),
                 max_depth=MAX_DEPTH, record_timing=True):
        try:
            budget = int(budget)
        except (TypeError, ValueError):
            raise ConfigurationError("budget must be an integer - got {}".format(budget))
        if budget < 1:
            raise ConfigurationError("budget must be at least 1 - got {}".format(budget))
        if checkpoint_every is not None and int(checkpoint_every) < 1:
            raise ConfigurationError("checkpoint interval must be positive - got {}".format(checkpoint_every))
        if not 1 <= int(max_depth) <= MAX_DEPTH:
            raise ConfigurationError("max depth must lie in [1, {}] - got {}".format(MAX_DEPTH, max_depth))
        self.budget = budget
        self.seed = int(seed)
        self.criteria = criteria or CriteriaConfig()
        self.checkpoint_every = None if checkpoint_every is None else int(checkpoint_every)
        self.checkpoints = tuple(int(c) for c in checkpoints)
        self.max_depth = int(max_depth)
        self.record_timing = bool(record_timing)

    def schedule(self):
        parts = [GeometricSchedule()]
        if self.checkpoint_every:
            parts.append(IntervalSchedule(self.checkpoint_every))
        if self.checkpoints:
            parts.append(FixedSchedule(self.checkpoints))
        schedule = UnionSchedule(*parts)
        schedule.setSource(self.budget)
        return schedule


class Engine(object):
    '''
    Mutable estimation state: the tree, the leaf index, the aggregates and
    the iteration counter keying the random streams.
    '''
    @trace.debug("Engine")
    def __init__(self, density, domain, config):
        if getattr(density, "dim", domain.dim) != domain.dim:
            raise ConfigurationError("density expects {} dimensions, domain has {}".format(density.dim, domain.dim))
        self.density = density
        self.domain = domain
        self.config = config
        self.tree = None
        self.index = LeafIndex()
        self.aggregates = Aggregates()
        self.iteration = 0
        self.timeline = []
        self.decision_seconds = 0.0
        self._eval_seconds = 0.0
        self._started = None
        self.log = logging.getLogger('libdefer')

    def random_stream(self, criterion):
        return streams.stream(self.config.seed, self.iteration, criterion)

    def _evaluate(self, unit_points):
        unit_points = np.asarray(unit_points, dtype=float).reshape(-1, self.domain.dim)
        start = time.perf_counter()
        values = np.asarray(self.density.log_density(self.domain.from_unit(unit_points)), dtype=float).reshape(-1)
        self._eval_seconds += time.perf_counter() - start
        if len(values) != len(unit_points):
            raise EvaluationError("density returned {} values for {} points".format(len(values), len(unit_points)))
        bad = np.isnan(values) | (values == np.inf)
        if np.any(bad):
            i = int(np.argmax(bad))
            point = self.domain.from_unit(unit_points[i])
            raise EvaluationError("density returned {} at {}".format(values[i], point.tolist()), point=point)
        return values

    def _include(self, nid):
        box, log_f = self.tree.box(nid), self.tree.log_f(nid)
        self.index.insert(nid, depth_key(box), log_f)
        self.aggregates.include(nid, sum(box.depths), log_f)

    @trace.info("Engine")
    def start(self):
        value = self._evaluate([unit_centroid(TernaryBox((0,) * self.domain.dim, (0,) * self.domain.dim))])[0]
        self.tree = create_root(self.domain, float(value), self.config.max_depth)
        self._include(self.tree.root)
        self._started = time.perf_counter()
        self.log.info("Starting estimation [dim={}, budget={}, seed={}]".format(self.domain.dim, self.config.budget, self.config.seed))
        return self

    def _probes(self, nid):
        box = self.tree.box(nid)
        shallow = min(box.depths)
        if shallow + 1 > self.tree.max_depth:
            raise DepthLimitError("leaf {} is already at the maximum depth of {}".format(nid, self.tree.max_depth), node=nid)
        dims = [j for j, k in enumerate(box.depths) if k == shallow]
        points = []
        for j in dims:
            for offset in (0, 2):
                numerators, depths = list(box.numerators), list(box.depths)
                numerators[j], depths[j] = 3 * numerators[j] + offset, depths[j] + 1
                points.append(unit_centroid(TernaryBox(numerators, depths)))
        return dims, points

    def divide(self, node_ids):
        '''
        Trisect every leaf in `node_ids` along its shallowest dimensions and
        return the new leaf ids per divided node.
        '''
        node_ids = list(node_ids)
        for nid in node_ids:
            if nid not in self.index:
                raise InvariantError("node {} is not a live leaf".format(nid), node=nid)
        probes = [self._probes(nid) for nid in node_ids]
        batch = [p for _, points in probes for p in points]
        values = self._evaluate(batch) if batch else np.empty(0)

        created, cursor = [], 0
        log_offset = self.aggregates.log_offset
        for nid, (dims, _) in zip(node_ids, probes):
            pairs = {}
            for j in dims:
                pairs[j] = (float(values[cursor]), float(values[cursor + 1]))
                cursor += 2
            ranked = tie_ranked(dims, value=lambda j: max(pairs[j]) + log_offset, tie=lambda j: j)
            parent_log_f = self.tree.log_f(nid)
            children = []
            outer = iter(v for j in ranked for v in pairs[j])
            for box, _, is_center in trisect_geometry(self.tree.box(nid), ranked, self.tree.max_depth):
                children.append((box, parent_log_f if is_center else next(outer)))
            ids = self.tree.split(nid, children)
            self.tree.eval_count += 2 * len(dims)
            self.index.remove(nid)
            self.aggregates.exclude(nid)
            for child in ids:
                self._include(child)
            created.append(list(ids))
        return created

    @trace.debug("Engine")
    def step(self):
        if self.tree is None:
            self.start()
        self.iteration += 1
        begin, evals = time.perf_counter(), self._eval_seconds
        selection = select_to_divide(self)
        self.divide(selection.nodes)
        self.decision_seconds += (time.perf_counter() - begin) - (self._eval_seconds - evals)
        self.log.debug("[{}] divided {} leaves [cr1={}, cr2={}, cr3={}, high_mass={}, leaves={}, keys={}]".format(
            self.iteration, len(selection.nodes), len(selection.cr1), len(selection.cr2), len(selection.cr3), selection.high_mass,
            self.tree.leaf_count, self.index.unique_keys))
        return selection

    @trace.debug("Engine")
    def checkpoint(self):
        previous = self.aggregates.recompute()
        current = self.aggregates.z_hat
        if abs(previous - current) > ZHAT_TOLERANCE * max(current, 1e-300):
            self.log.warn("Running evidence drifted from leaf sum - {} vs {}".format(previous, current))
        log_z = queries.evidence(self.tree, self.aggregates).log_z_hat
        entropy = queries.entropy(self.tree, self.aggregates) if current > 0 else math.nan
        timed = self.config.record_timing
        row = Checkpoint(self.tree.eval_count, log_z, entropy,
                         self.decision_seconds if timed else 0.0,
                         (time.perf_counter() - self._started) if timed else 0.0,
                         self.index.unique_keys)
        self.timeline.append(row)
        self.log.info("Checkpoint [evals={}, log_z={}, entropy={}, keys={}]".format(row.evals, row.log_z, row.entropy, row.unique_keys))
        return row

    @trace.info("Engine")
    def run(self, progress=None):
        if self.tree is None:
            self.start()
        schedule = self.config.schedule()
        due = schedule.get({"evals": self.tree.eval_count})
        while self.tree.leaf_count < self.config.budget:
            self.step()
            if progress:
                progress(self.tree.eval_count, self.config.budget)
            if due is not None and self.tree.eval_count >= due:
                if self.tree.leaf_count < self.config.budget:
                    self.checkpoint()
                due = schedule.get({"evals": self.tree.eval_count})
        self.checkpoint()
        self.log.info("Estimation finished [evals={}, log_z={}]".format(self.tree.eval_count, self.timeline[-1].log_z))
        return RunResult(self.tree, self.aggregates, list(self.timeline))


def divide(state, node_id):
    return state.divide([node_id])[0]

def step(state):
    state.step()
    return state

@trace.info("engine")
def run(f, domain, config, progress=None):
    return Engine(f, domain, config).run(progress)
