'''
Read-only computations on a finished partition: evidence, normalized
density, entropy, expectations, subregion mass, marginals, conditionals and
sampling.  Leaf masses come from the aggregates, so every normalized result
is unchanged when the density is scaled by a constant.
'''

import math

from fractions import Fraction

import numpy as np

from lace.logging import trace
from shewchuk import Expansion

from libdefer.exceptions import ConfigurationError, EvaluationError, OutOfDomainError, ZeroMassError
from libdefer.partition import LOG3, as_ratios, box_contains
from libdefer.result import ConditionalPiece, Evidence, SubregionMass


def _log_g(tree, aggregates, nid):
    return tree.log_f(nid) + aggregates.log_offset

def _require_mass(aggregates):
    z = aggregates.z_hat
    if not z > 0:
        raise ZeroMassError("the approximation carries no mass")
    return z

def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@trace.info("queries")
def evidence(tree, aggregates):
    if not aggregates.z_hat > 0:
        return Evidence(0.0, -math.inf, True)
    log_z = aggregates.log_z_hat + tree.domain.log_volume
    return Evidence(_exp(log_z), log_z, False)

@trace.debug("queries")
def density(tree, aggregates, point):
    ''' Normalized density of the approximation at `point`, original units '''
    z = _require_mass(aggregates)
    nid = tree.locate(point)
    return _exp(_log_g(tree, aggregates, nid) - math.log(z) - tree.domain.log_volume)

@trace.info("queries")
def entropy(tree, aggregates):
    '''
    Differential entropy in nats of the piecewise-constant approximation.
    Leaves without mass contribute nothing.
    '''
    log_z = math.log(_require_mass(aggregates))
    terms = []
    for nid in aggregates.leaf_ids():
        log_m = aggregates.log_mass(nid)
        if log_m == -math.inf:
            continue
        terms.append(math.exp(log_m - log_z) * (_log_g(tree, aggregates, nid) - log_z))
    return tree.domain.log_volume - math.fsum(terms)

@trace.info("queries")
def expectation(tree, aggregates, g):
    ''' Mass-weighted average of `g` over the leaf centroids '''
    _require_mass(aggregates)
    total, weight = Fraction(0), Fraction(0)
    for nid in aggregates.leaf_ids():
        m = aggregates.mass(nid)
        if m == 0.0:
            continue
        value = float(g(tree.centroid(nid)))
        if math.isnan(value):
            raise EvaluationError("expectation integrand returned NaN at {}".format(tree.centroid(nid).tolist()), node=nid)
        if math.isinf(value):
            return value
        m = Fraction(m)
        total += m * Fraction(value)
        weight += m
    return float(total / weight)


def _region(domain, lo, hi):
    lo = np.asarray(lo, dtype=float).reshape(-1)
    hi = np.asarray(hi, dtype=float).reshape(-1)
    if len(lo) != domain.dim or len(hi) != domain.dim:
        raise ConfigurationError("region needs {} lower and upper bounds".format(domain.dim))
    if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
        raise ConfigurationError("region bounds must not be NaN")
    lo, hi = np.maximum(lo, domain.lower), np.minimum(hi, domain.upper)
    return (lo, hi) if np.all(hi > lo) else None

def clipped_leaves(tree, lo, hi):
    '''
    Yield (node_id, clipped_lo, clipped_hi, fraction) for every leaf meeting
    the region [lo, hi] with positive volume.  Fully contained leaves report
    a fraction of exactly 1.
    '''
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        a, b = tree.bounds(nid)
        low, high = np.maximum(a, lo), np.minimum(b, hi)
        if np.any(high <= low):
            continue
        if not tree.is_leaf(nid):
            stack.extend(reversed(tree.children(nid)))
            continue
        if np.all(a >= lo) and np.all(b <= hi):
            yield nid, a, b, 1.0
        else:
            yield nid, low, high, float(np.prod((high - low) / (b - a)))

@trace.info("queries")
def subregion_mass(tree, aggregates, lo, hi):
    '''
    Mass of the approximation inside the box [lo, hi], clipping straddling
    leaves by volume fraction.  Returns the mass in original units and its
    probability under the normalized approximation.
    '''
    region = _region(tree.domain, lo, hi)
    if region is None:
        return SubregionMass(0.0, 0.0)
    levels, visited, clipped = {}, 0, False
    for nid, _, _, fraction in clipped_leaves(tree, *region):
        level = sum(tree.box(nid).depths)
        levels[level] = levels.get(level, Expansion()) + math.exp(_log_g(tree, aggregates, nid)) * fraction
        visited += 1
        clipped = clipped or fraction != 1.0
    if visited == len(aggregates) and not clipped:
        inside = aggregates.z_hat
    else:
        top = max(levels, default=0)
        inside = float(sum((Fraction(float(e)) * 3 ** (top - s) for s, e in levels.items()), Fraction(0)) / 3 ** top)
    if inside == 0.0:
        return SubregionMass(0.0, 0.0)
    mass = _exp(math.log(inside) - aggregates.log_offset + tree.domain.log_volume)
    z = aggregates.z_hat
    return SubregionMass(mass, inside / z if z > 0 else 0.0)


def _partial_ratios(domain, dims, values, what):
    dims = [int(d) for d in dims]
    values = np.asarray(values, dtype=float).reshape(-1)
    if not dims or len(set(dims)) != len(dims) or any(d < 0 or d >= domain.dim for d in dims):
        raise ConfigurationError("{} dimensions must be distinct indices below {} - got {}".format(what, domain.dim, dims))
    if len(values) != len(dims):
        raise ConfigurationError("expected {} {} coordinates - got {}".format(len(dims), what, len(values)))
    lower, upper = domain.lower[dims], domain.upper[dims]
    if not np.all((values >= lower) & (values <= upper)):
        raise OutOfDomainError("{} coordinates {} lie outside the domain".format(what, values.tolist()), point=values)
    u = np.clip((values - lower) / (upper - lower), 0.0, 1.0)
    ratios = [None] * domain.dim
    for d, r in zip(dims, as_ratios(u)):
        ratios[d] = r
    return dims, ratios

def _slice_leaves(tree, dims, ratios):
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        if not box_contains(tree.box(nid), ratios, dims):
            continue
        if tree.is_leaf(nid):
            yield nid
        else:
            stack.extend(reversed(tree.children(nid)))

@trace.info("queries")
def marginal_density(tree, aggregates, kept_dims, point_a):
    ''' Density of the approximation's marginal over `kept_dims` at `point_a` '''
    z = _require_mass(aggregates)
    kept, ratios = _partial_ratios(tree.domain, kept_dims, point_a, "kept")
    log_z, terms = math.log(z), []
    for nid in _slice_leaves(tree, kept, ratios):
        box = tree.box(nid)
        dropped = sum(k for i, k in enumerate(box.depths) if i not in kept)
        terms.append(math.exp(_log_g(tree, aggregates, nid) - dropped * LOG3 - log_z))
    return math.fsum(terms) / float(np.prod(tree.domain.width[kept]))

@trace.info("queries")
def conditional_slice(tree, aggregates, fixed_dims, fixed_values):
    '''
    Piecewise-constant conditional over the free dimensions given the fixed
    coordinates.  Pieces carry their bounds, exact ternary geometry and the
    density in original units of the free dimensions.
    '''
    fixed, ratios = _partial_ratios(tree.domain, fixed_dims, fixed_values, "fixed")
    free = [i for i in range(tree.domain.dim) if i not in fixed]
    if not free:
        raise ConfigurationError("a conditional needs at least one free dimension")
    hits = list(_slice_leaves(tree, fixed, ratios))
    weights = []
    for nid in hits:
        depths = tree.box(nid).depths
        log_w = _log_g(tree, aggregates, nid) - sum(depths[i] for i in free) * LOG3
        weights.append(math.exp(log_w) if log_w > -math.inf else 0.0)
    total = math.fsum(weights)
    if not total > 0:
        raise ZeroMassError("the slice at {} carries no mass".format(list(fixed_values)))
    scale = float(np.prod(tree.domain.width[free]))
    pieces = []
    for nid in hits:
        box = tree.box(nid)
        lo, hi = tree.bounds(nid)
        g = math.exp(_log_g(tree, aggregates, nid))
        pieces.append(ConditionalPiece(lo[free].tolist(), hi[free].tolist(),
                                       [box.numerators[i] for i in free], [box.depths[i] for i in free],
                                       g / total / scale))
    return pieces


class AliasSampler(object):
    '''
    Vose alias table over leaf masses.  A draw picks a slot uniformly and
    keeps it with probability prob[slot], otherwise takes alias[slot].
    Leaves are drawn from the box [lo, hi] stored per slot.
    '''
    def __init__(self, leaf_ids, weights, lo, hi, z_used):
        self.leaf_ids = np.asarray(leaf_ids, dtype=np.int64)
        self.lo, self.hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        self.z_used = z_used
        n = len(weights)
        scaled = np.asarray(weights, dtype=float) * (n / math.fsum(weights))
        self.prob = np.ones(n, dtype=float)
        self.alias = np.arange(n, dtype=np.int64)
        small = [i for i, w in enumerate(scaled) if w < 1.0]
        large = [i for i, w in enumerate(scaled) if w >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            self.prob[s], self.alias[s] = scaled[s], l
            scaled[l] = (scaled[l] + scaled[s]) - 1.0
            if scaled[l] < 1.0:
                small.append(l)
            else:
                large.append(l)
        self.prob.flags.writeable = self.alias.flags.writeable = False

    def __len__(self):
        return len(self.leaf_ids)

    def draw(self, rng, n):
        ''' Slot indices of `n` draws '''
        slots = rng.integers(0, len(self.prob), size=n)
        coins = rng.random(n)
        return np.where(coins < self.prob[slots], slots, self.alias[slots])

@trace.info("queries")
def build_sampler(tree, aggregates, region=None):
    '''
    Alias sampler over the live leaves, or over the leaves clipped to the
    box `region` = (lo, hi) with masses weighted by the clipped fraction.
    '''
    if region is None:
        entries = ((nid, aggregates.mass(nid)) + tuple(tree.bounds(nid)) for nid in aggregates.leaf_ids())
    else:
        clipped = _region(tree.domain, *region)
        entries = ((nid, aggregates.mass(nid) * fraction, lo, hi)
                   for nid, lo, hi, fraction in (clipped_leaves(tree, *clipped) if clipped is not None else ()))
    entries = [e for e in entries if e[1] > 0.0]
    if not entries:
        raise ZeroMassError("no leaf with positive mass to sample from")
    ids, weights, lows, highs = zip(*entries)
    return AliasSampler(ids, weights, np.array(lows), np.array(highs), aggregates.z_hat)

def _uniform_in(lo, hi, domain, rng):
    points = lo + rng.random(lo.shape) * (hi - lo)
    return np.clip(points, domain.lower, domain.upper).reshape(-1, domain.dim)

@trace.info("queries")
def sample(sampler, tree, rng, n):
    slots = sampler.draw(rng, int(n))
    return _uniform_in(sampler.lo[slots], sampler.hi[slots], tree.domain, rng)

@trace.debug("queries")
def sample_by_tree_search(tree, aggregates, rng, n):
    ''' Draws by descending the tree on subtree masses, logarithmic per draw '''
    _require_mass(aggregates)
    mass = np.zeros(len(tree))
    for nid in aggregates.leaf_ids():
        mass[nid] = aggregates.mass(nid)
    for nid in reversed(range(len(tree))):
        if not tree.is_leaf(nid):
            mass[nid] = math.fsum(mass[c] for c in tree.children(nid))
    chosen = []
    for u in rng.random(int(n)):
        nid, target = tree.root, u * mass[tree.root]
        while not tree.is_leaf(nid):
            children = [c for c in tree.children(nid) if mass[c] > 0]
            for c in children:
                if target < mass[c]:
                    nid = c
                    break
                target -= mass[c]
            else:
                nid = children[-1]
        chosen.append(nid)
    if not chosen:
        return np.empty((0, tree.domain.dim))
    lo, hi = zip(*(tree.bounds(nid) for nid in chosen))
    return _uniform_in(np.array(lo), np.array(hi), tree.domain, rng)
