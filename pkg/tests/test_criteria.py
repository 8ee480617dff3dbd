import math

import numpy as np
import pytest

from libdefer.criteria import CriteriaConfig
from libdefer.criteria.hull import HullPoint, abscissa, cr1_select, hull_candidates, ordinate, urqh
from libdefer.criteria.index import LeafIndex, index_insert, index_remove
from libdefer.criteria.representers import (affine_basis, ball_points, cr2_representers, cr3_representers,
                                            high_mass_set, HighMassSet)
from libdefer.exceptions import ConfigurationError, InvariantError
from libdefer.partition import LOG3, DomainSpec, create_root, depth_key, trisect_geometry, volume_diameter


def _point(x, y, node_id=0):
    return HullPoint(node_id, x, y, None)

def _random_partition(dim, target_leaves, rng):
    '''
    Tree of random log-densities in [-3, 3] grown by random trisections,
    with the matching leaf index.
    '''
    tree = create_root(DomainSpec.unit(dim), rng.uniform(-3, 3))
    index = LeafIndex()
    index.insert(tree.root, depth_key(tree.box(tree.root)), tree.log_f(tree.root))
    while True:
        leaves = tree.leaves()
        nid = leaves[rng.integers(len(leaves))]
        depths = tree.box(nid).depths
        dims = [j for j, k in enumerate(depths) if k == min(depths)]
        if tree.leaf_count + 2 * len(dims) > target_leaves:
            return tree, index
        ranked = [int(j) for j in rng.permutation(dims)]
        children = [(box, rng.uniform(-3, 3)) for box, _, _ in trisect_geometry(tree.box(nid), ranked)]
        index.remove(nid)
        for child in tree.split(nid, children):
            index.insert(child, depth_key(tree.box(child)), tree.log_f(child))

def _brute_force_cr1(tree, beta):
    '''
    Leaves maximising V (f + K d / 2) for some K > 0 whose bound at the
    largest such K reaches beta * Z / (N + 1), by direct interval analysis.
    '''
    ids = tree.leaves()
    keys = [depth_key(tree.box(nid)) for nid in ids]
    x = np.array([abscissa(k) for k in keys])
    y = np.array([ordinate(k, tree.log_f(nid)) for k, nid in zip(keys, ids)])
    threshold = beta * math.fsum(y) / (len(ids) + 1)
    selected = set()
    for i, nid in enumerate(ids):
        if np.any((x == x[i]) & (y > y[i])):
            continue
        left, right = x < x[i], x > x[i]
        k_lo = max([0.0] + ((y[left] - y[i]) / (x[i] - x[left])).tolist())
        k_hi = min([math.inf] + ((y[i] - y[right]) / (x[right] - x[i])).tolist())
        if k_hi <= 0 or k_lo > k_hi:
            continue
        if k_hi == math.inf or y[i] + k_hi * x[i] >= threshold:
            selected.add(nid)
    return selected, math.fsum(y)


def test_index_peek_single_leaf():
    index = index_insert(LeafIndex(), 7, (1, 1), math.log(0.5))
    assert list(index.keys()) == [(1, 1)]
    assert index.peek((1, 1)) == (math.log(0.5), 7)

def test_index_peek_is_maximum():
    index = LeafIndex()
    index.insert(1, (1, 1), math.log(0.5))
    index.insert(2, (1, 1), math.log(0.9))
    assert index.peek((1, 1))[1] == 2

def test_index_remove_only_entry():
    index = index_remove(index_insert(LeafIndex(), 3, (0, 2), 0.0), 3)
    assert index.peek((0, 2)) is None
    assert (0, 2) not in index.keys()
    assert index.unique_keys == 0

def test_index_remove_maximum():
    index = LeafIndex()
    for nid, value in [(1, 0.1), (2, 0.7), (3, 0.4)]:
        index.insert(nid, (1,), value)
    index.remove(2)
    assert index.peek((1,)) == (0.4, 3)

def test_index_errors():
    index = index_insert(LeafIndex(), 1, (0,), 0.0)
    with pytest.raises(InvariantError):
        index.insert(1, (0,), 0.0)
    with pytest.raises(InvariantError):
        index.remove(2)

def test_index_matches_list_oracle():
    rng = np.random.default_rng(11)
    index, live, next_id = LeafIndex(), {}, 0
    keys = [(0, 1), (1, 1), (1, 2), (2, 2), (0, 0)]
    for step in range(10000):
        if live and rng.random() < 0.45:
            nid = list(live)[rng.integers(len(live))]
            touched = live.pop(nid)[0]
            index.remove(nid)
        else:
            key, value = keys[rng.integers(len(keys))], float(rng.normal())
            index.insert(next_id, key, value)
            live[next_id] = (key, value)
            touched = key
            next_id += 1
        for key in (keys if step % 500 == 0 else [touched]):
            members = [(v, nid) for nid, (k, v) in live.items() if k == key]
            expected = max(members, key=lambda m: (m[0], -m[1])) if members else None
            assert index.peek(key) == expected
        assert index.unique_keys == len({k for k, _ in live.values()})


def test_index_head_breaks_rounding_level_ties_by_id():
    index = LeafIndex()
    index.insert(7, (1, 1), 1.0 + 2e-15)
    index.insert(3, (1, 1), 1.0)
    index.insert(5, (1, 1), 0.9)
    assert index.peek((1, 1)) == (1.0, 3)
    assert [node_id for _, _, node_id in index.heads()] == [3]
    index.remove(3)
    assert index.peek((1, 1)) == (1.0 + 2e-15, 7)
    index.insert(2, (1, 1), 1.0 + 1e-6)
    assert index.peek((1, 1)) == (1.0 + 1e-6, 2)

def test_candidates_keep_log_ordinates_below_underflow():
    index = LeafIndex()
    index.insert(0, (1, 1), -2000.0)
    index.insert(1, (0, 1), -2001.0)
    candidates = hull_candidates(index)
    assert all(p.y == 0.0 for p in candidates)
    assert [p.log_y for p in candidates] == pytest.approx([-2000.0 - 2 * LOG3, -2001.0 - LOG3])
    shifted = hull_candidates(index, 2000.0)
    assert [p.y for p in shifted] == pytest.approx([math.exp(p.log_y) for p in shifted])
    assert [p.log_y for p in shifted] == pytest.approx([-2 * LOG3, -1.0 - LOG3])

def test_candidates_one_per_key():
    index = LeafIndex()
    index.insert(1, (0, 1), 0.0)
    index.insert(2, (0, 1), 1.0)
    index.insert(3, (1, 1), 0.5)
    candidates = hull_candidates(index)
    assert len(candidates) == 2
    assert {p.node_id for p in candidates} == {2, 3}

def test_candidates_single_key():
    index = LeafIndex()
    for nid, value in enumerate([0.2, 1.5, -0.3]):
        index.insert(nid, (1, 1), value)
    assert [p.node_id for p in hull_candidates(index)] == [1]

def test_candidates_match_grouping():
    rng = np.random.default_rng(5)
    tree, index = _random_partition(3, 5000, rng)
    best = {}
    for nid in tree.leaves():
        key = depth_key(tree.box(nid))
        if key not in best or tree.log_f(nid) > tree.log_f(best[key]):
            best[key] = nid
    assert {p.node_id for p in hull_candidates(index)} == set(best.values())


def test_urqh_two_points():
    chain = urqh([_point(1, 3, 1), _point(2, 1, 2)])
    assert [p.node_id for p, _ in chain] == [1, 2]
    assert chain[0][1] == 2.0
    assert chain[1][1] == math.inf

def test_urqh_drops_point_below_segment():
    chain = urqh([_point(1, 3, 1), _point(1.5, 1.4, 2), _point(2, 1, 3)])
    assert [p.node_id for p, _ in chain] == [1, 3]

def test_urqh_starts_at_highest_point():
    chain = urqh([_point(1, 1, 1), _point(2, 5, 2), _point(3, 4, 3)])
    assert [p.node_id for p, _ in chain] == [2, 3]

def test_urqh_single_and_empty():
    assert urqh([]) == []
    assert urqh([_point(1, 1, 4)])[0][1] == math.inf

def test_urqh_matches_breakpoint_oracle():
    rng = np.random.default_rng(3)
    xs = np.sort(rng.random(200))
    ys = rng.random(200)
    points = [_point(float(x), float(y), i) for i, (x, y) in enumerate(zip(xs, ys))]
    with np.errstate(divide="ignore", invalid="ignore"):
        pairwise = (ys[None, :] - ys[:, None]) / (xs[:, None] - xs[None, :])
    slopes = np.unique(pairwise[np.isfinite(pairwise) & (pairwise > 0)])
    probes = np.concatenate([[slopes[0] / 2], slopes, slopes * (1 + 1e-9), [slopes[-1] * 2, 1e300]])
    argmax = set()
    for k in probes:
        values = ys + k * xs
        argmax.update(np.flatnonzero(values >= values.max() * (1 - 1e-12)).tolist())
    assert {p.node_id for p, _ in urqh(points)} == argmax


def test_cr1_root_only():
    index = index_insert(LeafIndex(), 0, (0, 0), 0.0)
    assert cr1_select(index, 1.0, 1, 1.0) == {0}

def test_cr1_zero_mass_still_divides_right_most():
    tree = create_root(DomainSpec.unit(2), -math.inf)
    index = index_insert(LeafIndex(), 0, (0, 0), -math.inf)
    children = [(box, -math.inf) for box, _, _ in trisect_geometry(tree.box(0), [0, 1])]
    index.remove(0)
    for child in tree.split(0, children):
        index.insert(child, depth_key(tree.box(child)), -math.inf)
    selected = cr1_select(index, 0.0, tree.leaf_count, 1.0)
    assert len(selected) == 1
    assert depth_key(tree.box(selected.pop())) == (0, 1)

@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0])
def test_cr1_matches_brute_force(beta):
    rng = np.random.default_rng(int(beta * 100))
    for _ in range(200):
        dim = int(rng.integers(1, 5))
        tree, index = _random_partition(dim, int(rng.integers(1, 501)), rng)
        expected, z = _brute_force_cr1(tree, beta)
        assert cr1_select(index, z, tree.leaf_count, beta) == expected


def test_high_mass_empty_below_threshold():
    masses = list(enumerate([100.0, 90.0, 1.0, 1.0, 1.0]))
    assert not high_mass_set(masses, 193.0, 5, 2, 20.0)

def test_high_mass_depends_on_alpha():
    masses = list(enumerate([1000.0, 900.0, 1.0, 1.0, 1.0, 1.0]))
    assert not high_mass_set(masses, 1904.0, 6, 2, 20.0)
    assert high_mass_set(masses, 1904.0, 6, 2, 2.0).node_ids == [0, 1]

def test_high_mass_equal_masses():
    masses = [(i, 0.1) for i in range(10)]
    assert len(high_mass_set(masses, 1.0, 10, 5, 20.0)) == 0

def test_high_mass_needs_two_members():
    masses = [(0, 100.0), (1, 1.0), (2, 1.0)]
    assert not high_mass_set(masses, 102.0, 3, 3, 1.0)

def test_high_mass_orders_rounding_level_ties_by_id():
    masses = [(4, 1.0), (2, 1.0 - 1e-15), (9, 0.5), (1, 0.01)]
    assert high_mass_set(masses, 2.51, 4, 3, 0.5).node_ids == [2, 4, 9]
    assert high_mass_set(masses, 2.51, 4, 1, 0.5).node_ids == []

def test_high_mass_ignores_zero_mass():
    masses = [(0, 5.0), (1, 0.0), (2, 0.0)]
    assert not high_mass_set(masses, 5.0, 3, 3, 0.01)


def _square_after_one_split():
    tree = create_root(DomainSpec.unit(2), 0.0)
    children = [(box, 0.0) for box, _, _ in trisect_geometry(tree.box(0), [0, 1])]
    return tree, tree.split(0, children)

def test_cr2_midpoint_of_two_centroids():
    tree, ids = _square_after_one_split()
    high_mass = HighMassSet([(ids[0], 1.0), (ids[1], 1.0)], 2, 1.0)
    points = cr2_representers(high_mass, tree, np.random.default_rng(0), linear_points=0)
    assert np.allclose(points, [[0.5, 0.5]])

def test_cr2_skips_collinear_triple():
    tree, ids = _square_after_one_split()
    high_mass = HighMassSet([(ids[0], 1.0), (ids[1], 1.0), (ids[4], 1.0)], 3, 1.0)
    points = cr2_representers(high_mass, tree, np.random.default_rng(0), linear_points=0)
    assert np.allclose(np.array(sorted(points.tolist())), [[1 / 3, 0.5], [0.5, 0.5], [2 / 3, 0.5]])

def test_cr2_random_points_lie_on_the_hull():
    tree, ids = _square_after_one_split()
    high_mass = HighMassSet([(ids[2], 1.0), (ids[3], 1.0)], 2, 1.0)
    points = cr2_representers(high_mass, tree, np.random.default_rng(1), linear_points=20)
    assert len(points) > 1
    assert np.allclose(points[:, 0], 0.5, rtol=0, atol=1e-12)
    assert np.all((points >= 0) & (points <= 1))

def test_affine_basis_degenerate():
    assert affine_basis(np.array([[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]])) is None
    origin, basis = affine_basis(np.array([[0.1, 0.2], [0.6, 0.4], [0.3, 0.9]]))
    assert basis.shape == (2, 2)
    assert np.allclose(basis.T @ basis, np.eye(2))

def test_cr_representers_need_two_members():
    tree, ids = _square_after_one_split()
    single = HighMassSet([(ids[0], 1.0)], 2, 1.0)
    rng = np.random.default_rng(0)
    assert cr2_representers(single, tree, rng).shape == (0, 2)
    assert cr3_representers(single, tree, rng, 1.2, 2).shape == (0, 2)

def test_ball_points_inside_ball():
    rng = np.random.default_rng(2)
    center = np.array([0.5, 0.5, 0.5])
    points = ball_points(center, 0.1, 5000, rng)
    assert points.shape == (5000, 3)
    assert np.all(np.linalg.norm(points - center, axis=1) < 0.1)
    assert np.abs(points.mean(axis=0) - center).max() < 0.01

def test_ball_points_uniform_on_a_segment():
    n, radius = 100000, 0.2
    points = ball_points(np.array([0.5]), radius, n, np.random.default_rng(11))[:, 0]
    assert abs(points.mean() - 0.5) < 4 * radius / math.sqrt(3 * n)
    inner = np.mean(np.abs(points - 0.5) < radius / 2)
    assert abs(inner - 0.5) < 4 * math.sqrt(0.25 / n)

@pytest.mark.parametrize("dim", [2, 3, 5])
def test_ball_points_radial_law(dim):
    n, radius = 100000, 0.1
    center = np.full(dim, 0.5)
    points = ball_points(center, radius, n, np.random.default_rng(dim))
    inner = np.mean(np.linalg.norm(points - center, axis=1) < radius / 2)
    expected = 0.5 ** dim
    assert abs(inner - expected) < 4 * math.sqrt(expected * (1 - expected) / n)

def test_cr3_points_near_high_mass_centroids():
    tree, ids = _square_after_one_split()
    high_mass = HighMassSet([(ids[4], 1.0), (ids[0], 1.0)], 2, 1.0)
    points = cr3_representers(high_mass, tree, np.random.default_rng(4), 1.2, 50)
    radius = max(1.2 * volume_diameter(tree.box(nid))[1] / 2 for nid in (ids[4], ids[0]))
    centers = np.array([tree.unit_centroid(ids[4]), tree.unit_centroid(ids[0])])
    distance = np.min(np.linalg.norm(points[:, None, :] - centers[None], axis=2), axis=1)
    assert len(points) >= 50
    assert np.all(distance < radius)
    assert np.all((points >= 0) & (points <= 1))


def test_criteria_config_defaults():
    config = CriteriaConfig()
    assert config.resolved_m(2) == 2
    assert config.resolved_m(10) == 5
    assert config.resolved_b(7) == 7
    assert config.to_dict()["beta"] == 1.0

@pytest.mark.parametrize("kwargs", [dict(beta=0), dict(alpha=-1), dict(phi=1.0), dict(big_m=1), dict(ball_points=-1)])
def test_criteria_config_rejects(kwargs):
    with pytest.raises(ConfigurationError):
        CriteriaConfig(**kwargs)
