from lace.logging import trace

from libdefer import dump
from libdefer.approximation import Approximation
from libdefer.criteria import CriteriaConfig
from libdefer.density import DensityFunction, FunctionDensity, TargetSpec, makeDensity
from libdefer.engine import EngineConfig, Engine
from libdefer.exceptions import ConfigurationError
from libdefer.partition import DomainSpec

@trace.info("API")
def estimate(target, dim=None, budget=10000, seed=0, lower=None, upper=None, progress=None, **kwargs):
    '''
    Approximate `target` with `budget` evaluations.  `target` is a
    DensityFunction, a target name or a callable returning log densities
    for a batch of points (then `dim` is required).  The domain defaults to
    the unit cube.  Remaining keyword arguments configure the criteria.
    '''
    density = _density(target, dim, seed)
    dim = density.dim
    domain = DomainSpec([0.0] * dim if lower is None else lower, [1.0] * dim if upper is None else upper)
    config = EngineConfig(budget, seed=seed, criteria=CriteriaConfig(**kwargs))
    result = Engine(density, domain, config).run(progress)
    return Approximation(result.tree, result.aggregates, result.timeline, seed)

@trace.info("API")
def load(path, seed=0):
    tree, aggregates = dump.read_partitions(path)
    return Approximation(tree, aggregates, seed=seed)

@trace.debug("API")
def _density(target, dim, seed):
    if isinstance(target, DensityFunction):
        return target
    if isinstance(target, str):
        if dim is None and target == "mog4":
            dim = 4
        if dim is None:
            raise ConfigurationError("a named target needs its dimension")
        return makeDensity(TargetSpec(target, dim, seed=seed))
    if callable(target):
        if dim is None:
            raise ConfigurationError("a callable target needs its dimension")
        return FunctionDensity(dim, target)
    raise ConfigurationError("unsupported target {!r}".format(target))
