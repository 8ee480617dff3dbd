from lace import logging
from lace.logging import trace

from libdefer import dump, queries
from libdefer.util import rng as streams


class Approximation(object):
    '''
    A finished partition with the query operations bound to it.  Built by
    `libdefer.estimate` or read back from a partition dump with
    `libdefer.load`.
    '''
    @trace.debug("Approximation")
    def __init__(self, tree, aggregates, timeline=None, seed=0):
        self.tree = tree
        self.aggregates = aggregates
        self.timeline = list(timeline or [])
        self.seed = seed
        self._sampler = None
        self.log = logging.getLogger('libdefer')

    @property
    def domain(self):
        return self.tree.domain

    def __len__(self):
        return self.tree.leaf_count

    def evidence(self):
        return queries.evidence(self.tree, self.aggregates)

    def log_evidence(self):
        return self.evidence().log_z_hat

    def density(self, point):
        return queries.density(self.tree, self.aggregates, point)

    def entropy(self):
        return queries.entropy(self.tree, self.aggregates)

    def expectation(self, g):
        return queries.expectation(self.tree, self.aggregates, g)

    def subregion(self, lo, hi):
        return queries.subregion_mass(self.tree, self.aggregates, lo, hi)

    def marginal(self, dims, at):
        return queries.marginal_density(self.tree, self.aggregates, dims, at)

    def conditional(self, dims, values):
        return queries.conditional_slice(self.tree, self.aggregates, dims, values)

    @trace.info("Approximation")
    def sample(self, n, seed=None, region=None):
        '''
        `n` points from the approximation, restricted to the box
        `region` = (lo, hi) when given.
        '''
        if region is not None:
            sampler = queries.build_sampler(self.tree, self.aggregates, region=region)
        else:
            if self._sampler is None:
                self._sampler = queries.build_sampler(self.tree, self.aggregates)
            sampler = self._sampler
        rng = streams.stream(self.seed if seed is None else seed, streams.SAMPLE)
        return queries.sample(sampler, self.tree, rng, n)

    @trace.info("Approximation")
    def save(self, path):
        self.log.info("Writing {} leaves to {}".format(self.tree.leaf_count, path))
        return dump.write_partitions(self.tree, path)
