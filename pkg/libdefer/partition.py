'''
Exact ternary partition geometry and the search tree over it.

Boxes are kept in the normalized unit cube as integer pairs (n_i, k_i) per
dimension, standing for [n_i / 3^k_i, (n_i + 1) / 3^k_i).  Boxes touching the
upper face of the cube are closed there, so every point of the closed domain
belongs to exactly one leaf.  Floating point bounds and centroids are derived
views only.
'''

import math

from collections import namedtuple
from functools import lru_cache

import numpy as np

from lace.logging import trace

from libdefer.exceptions import ConfigurationError, DepthLimitError, InvariantError, OutOfDomainError
from libdefer.settings import MAX_DEPTH

LOG3 = math.log(3.0)
POW3 = [3 ** k for k in range(MAX_DEPTH + 2)]

LEAF, DIVIDED = "leaf", "divided"

TernaryBox = namedtuple('TernaryBox', ['numerators', 'depths'])
PartitionNode = namedtuple('PartitionNode', ['id', 'box', 'log_f', 'children', 'status'])


class DomainSpec(object):
    @trace.debug("DomainSpec")
    def __init__(self, lower, upper):
        try:
            lower = np.array(lower, dtype=float).reshape(-1)
            upper = np.array(upper, dtype=float).reshape(-1)
        except (TypeError, ValueError) as exp:
            raise ConfigurationError("domain bounds must be numeric - {}".format(exp))
        if not len(lower) or len(lower) != len(upper):
            raise ConfigurationError("domain bounds must be non-empty and of equal length - got {} and {}".format(len(lower), len(upper)))
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ConfigurationError("domain bounds must be finite")
        if np.any(upper <= lower):
            raise ConfigurationError("domain requires upper > lower in every dimension - got {} / {}".format(lower.tolist(), upper.tolist()))
        self.dim = len(lower)
        self.lower, self.upper = lower, upper
        self.width = upper - lower
        self.log_volume = float(np.sum(np.log(self.width)))
        self.lower.flags.writeable = self.upper.flags.writeable = self.width.flags.writeable = False

    @classmethod
    def unit(cls, dim):
        return cls(np.zeros(dim), np.ones(dim))

    def to_unit(self, point):
        point = np.asarray(point, dtype=float).reshape(-1)
        if len(point) != self.dim:
            raise OutOfDomainError("expected a point with {} coordinates - got {}".format(self.dim, len(point)), point=point)
        if not np.all((point >= self.lower) & (point <= self.upper)):
            raise OutOfDomainError("point {} lies outside the domain".format(point.tolist()), point=point)
        return np.clip((point - self.lower) / self.width, 0.0, 1.0)

    def from_unit(self, u):
        return np.clip(self.lower + np.asarray(u, dtype=float) * self.width, self.lower, self.upper)

    def __eq__(self, other):
        if not isinstance(other, DomainSpec):
            return NotImplemented
        return np.array_equal(self.lower, other.lower) and np.array_equal(self.upper, other.upper)

    def __repr__(self):
        return "DomainSpec({}, {})".format(self.lower.tolist(), self.upper.tolist())


@lru_cache(maxsize=None)
def key_geometry(key):
    ''' Volume and diameter of every box whose sorted depth vector is `key` '''
    volume = 3.0 ** -sum(key)
    diameter = math.sqrt(math.fsum(9.0 ** -k for k in key))
    return volume, diameter

def depth_key(box):
    return tuple(sorted(box.depths))

def volume_diameter(box):
    return key_geometry(depth_key(box))

def log_volume(box):
    return -sum(box.depths) * LOG3

def unit_centroid(box):
    return tuple((2 * n + 1) / (2 * POW3[k]) for n, k in zip(*box))

def unit_bounds(box):
    lo = tuple(n / POW3[k] for n, k in zip(*box))
    hi = tuple((n + 1) / POW3[k] for n, k in zip(*box))
    return lo, hi

def as_ratios(u):
    ''' Exact (p, q) pairs of a normalized point, q a power of two '''
    return [float(x).as_integer_ratio() for x in u]

def box_contains(box, ratios, dims=None):
    for i in (range(len(ratios)) if dims is None else dims):
        n, k = box.numerators[i], box.depths[i]
        p, q = ratios[i]
        scaled = p * POW3[k]
        if scaled < n * q:
            return False
        if scaled >= (n + 1) * q and not (p == q and n + 1 == POW3[k]):
            return False
    return True

@trace.debug("partition")
def trisect_geometry(box, ranked_dims, max_depth=MAX_DEPTH):
    '''
    Children of `box` when the dimensions in `ranked_dims` are trisected in
    that order.  Returns (child, centroid, is_center) triples, the two outer
    thirds of every ranked dimension first, then the center box.
    '''
    if not ranked_dims or len(set(ranked_dims)) != len(ranked_dims):
        raise ValueError("ranked dimensions must be non-empty and distinct - got {}".format(ranked_dims))
    dim = len(box.depths)
    if any(j < 0 or j >= dim for j in ranked_dims):
        raise ValueError("dimension index out of range in {}".format(ranked_dims))
    if any(box.depths[j] + 1 > max_depth for j in ranked_dims):
        raise DepthLimitError("trisection would exceed the maximum depth of {}".format(max_depth))

    children = []
    numerators, depths = list(box.numerators), list(box.depths)
    for j in ranked_dims:
        n, k = numerators[j], depths[j]
        depths[j] = k + 1
        for offset in (0, 2):
            numerators[j] = 3 * n + offset
            child = TernaryBox(tuple(numerators), tuple(depths))
            children.append((child, unit_centroid(child), False))
        numerators[j] = 3 * n + 1
    center = TernaryBox(tuple(numerators), tuple(depths))
    children.append((center, unit_centroid(center), True))
    return children


class Tree(object):
    '''
    Append-only arena of partition nodes.  Node ids index parallel lists;
    divided nodes are retained with their children ids.
    '''
    root = 0

    def __init__(self, domain, max_depth=MAX_DEPTH):
        self.domain = domain
        self.max_depth = max_depth
        self.leaf_count = 0
        self.eval_count = 0
        self._boxes = []
        self._log_f = []
        self._children = []

    def __len__(self):
        return len(self._boxes)

    def _append(self, box, log_f):
        if math.isnan(log_f):
            raise InvariantError("node density must not be NaN")
        self._boxes.append(box)
        self._log_f.append(float(log_f))
        self._children.append(None)
        return len(self._boxes) - 1

    def node(self, nid):
        children = self._children[nid]
        return PartitionNode(nid, self._boxes[nid], self._log_f[nid], list(children or ()),
                             LEAF if children is None else DIVIDED)

    def box(self, nid):
        return self._boxes[nid]

    def log_f(self, nid):
        return self._log_f[nid]

    def children(self, nid):
        return self._children[nid] or ()

    def is_leaf(self, nid):
        return self._children[nid] is None

    def leaves(self):
        return [nid for nid, c in enumerate(self._children) if c is None]

    def unit_centroid(self, nid):
        return unit_centroid(self._boxes[nid])

    def centroid(self, nid):
        return self.domain.from_unit(unit_centroid(self._boxes[nid]))

    def bounds(self, nid):
        ''' Original-unit bounds of a node, exact at the domain faces '''
        box = self._boxes[nid]
        lo, hi = (np.array(b) for b in unit_bounds(box))
        lo = self.domain.lower + lo * self.domain.width
        hi = self.domain.lower + hi * self.domain.width
        for i, (n, k) in enumerate(zip(*box)):
            if n == 0:
                lo[i] = self.domain.lower[i]
            if n + 1 == POW3[k]:
                hi[i] = self.domain.upper[i]
        return lo, hi

    def split(self, nid, children):
        '''
        Attach (box, log_f) children to a live leaf and return their ids.
        The caller guarantees the boxes tile the parent.
        '''
        if self._children[nid] is not None:
            raise InvariantError("node {} is already divided".format(nid), node=nid)
        ids = tuple(self._append(box, log_f) for box, log_f in children)
        self._children[nid] = ids
        self.leaf_count += len(ids) - 1
        return ids

    def locate_unit(self, u):
        ratios = as_ratios(u)
        nid = self.root
        while self._children[nid] is not None:
            for child in self._children[nid]:
                if box_contains(self._boxes[child], ratios):
                    nid = child
                    break
            else:
                raise InvariantError("children of node {} do not cover {}".format(nid, list(u)), node=nid)
        return nid

    def locate(self, point):
        return self.locate_unit(self.domain.to_unit(point))

    @classmethod
    def from_leaves(cls, domain, leaves, max_depth=MAX_DEPTH):
        '''
        Flattened tree over (box, log_f) leaves: a root holding every leaf as
        a direct child.  Used for trees read back from a partition dump.
        '''
        tree = cls(domain, max_depth)
        tree._append(TernaryBox((0,) * domain.dim, (0,) * domain.dim), float("-inf"))
        tree.leaf_count = 1
        leaves = list(leaves)
        if len(leaves) > 1:
            tree.split(tree.root, leaves)
        elif leaves:
            tree._log_f[tree.root] = float(leaves[0][1])
        tree.eval_count = tree.leaf_count
        return tree


@trace.info("partition")
def create_root(domain, log_f_at_center, max_depth=MAX_DEPTH):
    if not isinstance(domain, DomainSpec):
        raise ConfigurationError("create_root requires a DomainSpec")
    if log_f_at_center is None or math.isnan(log_f_at_center):
        raise ConfigurationError("root density must not be NaN")
    tree = Tree(domain, max_depth)
    tree._append(TernaryBox((0,) * domain.dim, (0,) * domain.dim), log_f_at_center)
    tree.leaf_count = tree.eval_count = 1
    return tree

def locate(tree, point):
    return tree.locate(point)
