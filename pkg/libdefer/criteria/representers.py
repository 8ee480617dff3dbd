'''
Representer points for the high-mass criteria.

Affine-hull points probe the linear subspaces spanned by subsets of the
high-mass centroids; ball points probe the neighbourhood of every high-mass
centroid.  The leaves containing these points are divided.  All points are
in normalized coordinates and points outside the closed unit cube are
dropped.
'''

import itertools

import numpy as np

from libdefer.partition import volume_diameter
from libdefer.settings import DEGENERACY_TOL
from libdefer.util.ranking import tie_ranked


class HighMassSet(object):
    def __init__(self, members, big_m, alpha):
        self.members = list(members)
        self.big_m = big_m
        self.alpha = alpha

    def __len__(self):
        return len(self.members)

    def __bool__(self):
        return bool(self.members)

    @property
    def node_ids(self):
        return [node_id for node_id, _ in self.members]

    def __repr__(self):
        return "HighMassSet({})".format(self.members)


def high_mass_set(masses, z_hat, n_t, big_m, alpha):
    '''
    Leaves with mass both among the `big_m` largest and at least `alpha`
    times the average; empty unless at least two qualify.  Ties at the
    cut-off go to the lower node id, masses equal up to rounding count as
    ties, and only positive masses qualify.
    '''
    ranked = tie_ranked(masses, value=lambda m: m[1], tie=lambda m: m[0], floor=0.0)[:big_m]
    threshold = alpha * z_hat / (n_t + 1)
    members = [(node_id, mass) for node_id, mass in ranked if mass > 0 and mass >= threshold]
    if len(members) <= 1:
        members = []
    return HighMassSet(members, big_m, alpha)

def _inside(points):
    return points[np.all((points >= 0.0) & (points <= 1.0), axis=1)]

def _dedupe(points, dim):
    seen = {}
    for p in points:
        seen.setdefault(tuple(p.tolist()), p)
    return np.array(list(seen.values())).reshape(-1, dim)

def affine_basis(centroids):
    '''
    Anchor and orthonormal basis of the affine hull of `centroids`, or None
    when the points are affinely degenerate.  The anchor is the centroid
    closest to the center of the cube.
    '''
    anchor = int(np.argmin(np.sum((centroids - 0.5) ** 2, axis=1)))
    origin = centroids[anchor]
    spans = np.delete(centroids, anchor, axis=0) - origin
    singular = np.linalg.svd(spans, compute_uv=False)
    if singular[0] <= 0.0 or singular[-1] < DEGENERACY_TOL * singular[0]:
        return None
    basis, _ = np.linalg.qr(spans.T)
    return origin, basis

def cr2_representers(high_mass, tree, rng, linear_points=1):
    if len(high_mass) < 2:
        return np.empty((0, tree.domain.dim))
    centroids = np.array([tree.unit_centroid(node_id) for node_id in high_mass.node_ids])
    points = []
    for size in range(2, len(centroids) + 1):
        for subset in itertools.combinations(range(len(centroids)), size):
            chosen = centroids[list(subset)]
            frame = affine_basis(chosen)
            if frame is None:
                continue
            origin, basis = frame
            points.append(chosen.mean(axis=0, keepdims=True))
            if linear_points:
                u = rng.random((linear_points, tree.domain.dim))
                points.append(origin + ((u - origin) @ basis) @ basis.T)
    if not points:
        return np.empty((0, tree.domain.dim))
    return _dedupe(_inside(np.vstack(points)), tree.domain.dim)

def ball_points(center, radius, count, rng):
    ''' Uniform points in the open ball, direction by normalized Gaussians '''
    dim = len(center)
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.random(count) ** (1.0 / dim)
    return np.asarray(center) + directions * radii[:, None]

def cr3_representers(high_mass, tree, rng, phi, ball_count):
    if len(high_mass) < 2 or not ball_count:
        return np.empty((0, tree.domain.dim))
    points = []
    for node_id in high_mass.node_ids:
        _, diameter = volume_diameter(tree.box(node_id))
        points.append(ball_points(tree.unit_centroid(node_id), phi * diameter / 2.0, ball_count, rng))
    return _inside(np.vstack(points))
