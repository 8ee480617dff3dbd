'''
Upper-bound mass prioritisation over all rate-of-change constants.

Every live leaf maps to the point (V d / 2, V f).  A leaf maximises
V (f + K d / 2) for some K > 0 exactly when its point lies on the upper-right
chain of the convex hull, from the highest point to the right-most one.
Only the best leaf of every abscissa can be on that chain, which is what the
LeafIndex hands out.
'''

import math

from collections import namedtuple

from libdefer.partition import LOG3, key_geometry

HullPoint = namedtuple('HullPoint', ['node_id', 'x', 'y', 'key', 'log_y'], defaults=(None,))


def abscissa(key):
    volume, diameter = key_geometry(key)
    return volume * diameter / 2.0

def log_ordinate(key, log_f, log_offset=0.0):
    return log_f + log_offset - sum(key) * LOG3

def ordinate(key, log_f, log_offset=0.0):
    return math.exp(log_f + log_offset) * key_geometry(key)[0]

def hull_candidates(index, log_offset=0.0):
    points = sorted((HullPoint(node_id, abscissa(key), ordinate(key, log_f, log_offset), key,
                               log_ordinate(key, log_f, log_offset))
                     for key, log_f, node_id in index.heads()),
                    key=lambda p: (p.x, -p.log_y, p.node_id))
    merged = []
    for p in points:
        if merged and merged[-1].x == p.x:
            continue
        merged.append(p)
    return merged

def _cross(o, a, b):
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)

def urqh(candidates):
    '''
    Upper-right chain of the hull over `candidates` (ascending x, one point
    per abscissa) paired with the largest K for which each member keeps
    the maximal upper bound; the right-most member carries +inf.  Collinear
    members are kept.
    '''
    if not candidates:
        return []
    start = 0
    for i, p in enumerate(candidates):
        if p.y >= candidates[start].y:
            start = i
    chain = []
    for p in candidates[start:]:
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) > 0:
            chain.pop()
        chain.append(p)
    bounds = [(a.y - b.y) / (b.x - a.x) for a, b in zip(chain, chain[1:])]
    bounds.append(math.inf)
    return list(zip(chain, bounds))

def cr1_select(index, z_hat, n_t, beta, log_offset=0.0):
    threshold = beta * z_hat / (n_t + 1)
    selected = set()
    for point, k_upper in urqh(hull_candidates(index, log_offset)):
        if k_upper == math.inf or point.y + k_upper * point.x >= threshold:
            selected.add(point.node_id)
    return selected
