from lace import logging
from lace.logging import trace

from libdefer.criteria.hull import cr1_select
from libdefer.criteria.representers import cr2_representers, cr3_representers, high_mass_set
from libdefer.exceptions import ConfigurationError
from libdefer.result import Selection
from libdefer.settings import ALPHA, BETA, BIG_M_CAP, LINEAR_POINTS, PHI
from libdefer.util import rng as streams

log = logging.getLogger('libdefer')


class CriteriaConfig(object):
    '''
    Parameters of the three division criteria.  `big_m` and `ball_points`
    default to min(5, D) and D once the dimension is known.
    '''
    def __init__(self, beta=BETA, alpha=ALPHA, phi=PHI, big_m=None, linear_points=LINEAR_POINTS,
                 ball_points=None, use_cr2=True, use_cr3=True):
        if not beta > 0:
            raise ConfigurationError("beta must be positive - got {}".format(beta))
        if not alpha > 0:
            raise ConfigurationError("alpha must be positive - got {}".format(alpha))
        if not phi > 1:
            raise ConfigurationError("phi must exceed 1 - got {}".format(phi))
        if big_m is not None and int(big_m) < 2:
            raise ConfigurationError("M must be at least 2 - got {}".format(big_m))
        if int(linear_points) < 0 or (ball_points is not None and int(ball_points) < 0):
            raise ConfigurationError("representer point counts must be non-negative")
        self.beta, self.alpha, self.phi = float(beta), float(alpha), float(phi)
        self.big_m = None if big_m is None else int(big_m)
        self.linear_points = int(linear_points)
        self.ball_points = None if ball_points is None else int(ball_points)
        self.use_cr2, self.use_cr3 = bool(use_cr2), bool(use_cr3)

    def resolved_m(self, dim):
        return self.big_m if self.big_m is not None else min(BIG_M_CAP, dim)

    def resolved_b(self, dim):
        return self.ball_points if self.ball_points is not None else dim

    def to_dict(self):
        return dict(beta=self.beta, alpha=self.alpha, phi=self.phi, big_m=self.big_m, l=self.linear_points,
                    b=self.ball_points, use_cr2=self.use_cr2, use_cr3=self.use_cr3)


@trace.debug("criteria")
def select_to_divide(state):
    '''
    Leaves to divide this iteration: the CR1 hull selection plus the leaves
    hit by CR2 and CR3 representer points.  `state` exposes `tree`,
    `index`, `aggregates`, `config` and `random_stream(criterion)`.
    '''
    tree, aggregates, config = state.tree, state.aggregates, state.config.criteria
    dim = tree.domain.dim
    z_hat = aggregates.z_hat
    cr1 = cr1_select(state.index, z_hat, tree.leaf_count, config.beta, aggregates.log_offset)

    cr2, cr3, high_mass = set(), set(), []
    if config.use_cr2 or config.use_cr3:
        big_m = config.resolved_m(dim)
        high_mass = high_mass_set(aggregates.top(big_m), z_hat, tree.leaf_count, big_m, config.alpha)
        if high_mass:
            kept = 0
            if config.use_cr2:
                points = cr2_representers(high_mass, tree, state.random_stream(streams.CR2), config.linear_points)
                cr2, kept = {tree.locate_unit(p) for p in points}, kept + len(points)
            if config.use_cr3:
                points = cr3_representers(high_mass, tree, state.random_stream(streams.CR3), config.phi, config.resolved_b(dim))
                cr3, kept = {tree.locate_unit(p) for p in points}, kept + len(points)
            requested = (config.use_cr2 and config.linear_points) or (config.use_cr3 and config.resolved_b(dim))
            if requested and not kept:
                log.warn("[{}] every representer point fell outside the unit cube [high_mass={}]".format(
                    getattr(state, "iteration", "-"), high_mass.node_ids))
    return Selection(cr1, cr2, cr3, sorted(cr1 | cr2 | cr3), len(high_mass))
